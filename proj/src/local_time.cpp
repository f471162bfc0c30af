#include "ebm/local_time.hpp"

#include <algorithm>
#include <stdexcept>

#include "ebm/stats.hpp"

namespace ebm {

LocalTimeField::LocalTimeField(double bin_width) : dx_(bin_width) {
    if (!(bin_width > 0.0) || !std::isfinite(bin_width))
        throw std::invalid_argument("LocalTimeField: bin_width must be positive and finite");
}

void LocalTimeField::grow(std::int64_t bin) {
    if (occ_.empty()) {
        lo_ = bin;
        occ_.assign(1, 0.0);
    } else if (bin < lo_) {
        // grow left with geometric slack so repeated frontier pushes stay O(1) amortized
        const std::int64_t pad =
            std::max<std::int64_t>(static_cast<std::int64_t>(occ_.size()) / 2, 16);
        const std::int64_t new_lo = bin - pad;
        occ_.insert(occ_.begin(), static_cast<std::size_t>(lo_ - new_lo), 0.0);
        lo_ = new_lo;
    } else if (bin > hi_bin()) {
        const std::int64_t pad =
            std::max<std::int64_t>(static_cast<std::int64_t>(occ_.size()) / 2, 16);
        occ_.resize(static_cast<std::size_t>(bin - lo_ + 1 + pad), 0.0);
    }
}

double LocalTimeField::total() const { return pairwise_sum(occ_); }

}
