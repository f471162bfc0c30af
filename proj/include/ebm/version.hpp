#pragma once

namespace ebm {

inline constexpr const char* kLibraryVersion = "1.0.0";
inline constexpr const char* kManifestFormat = "ebm-manifest/1";

}
