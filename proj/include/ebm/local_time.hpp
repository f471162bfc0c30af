#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace ebm {

// Binned occupation-time field on a lazily growing grid. x = 0 is a bin
// center: bin i covers [(i-1/2)*dx, (i+1/2)*dx) and stores the occupation
// time accumulated while the path stood in it. The local time L_t^x is
// estimated by occupation(bin(x)) / bin_width (box kernel).
class LocalTimeField {
  public:
    explicit LocalTimeField(double bin_width);

    double bin_width() const { return dx_; }

    std::int64_t bin_index(double x) const {
        return static_cast<std::int64_t>(std::floor(x / dx_ + 0.5));
    }
    double bin_center(std::int64_t bin) const { return dx_ * static_cast<double>(bin); }

    // occupation time of a bin; untouched bins read 0
    double occupation(std::int64_t bin) const {
        if (occ_.empty() || bin < lo_ || bin > hi_bin()) return 0.0;
        return occ_[static_cast<std::size_t>(bin - lo_)];
    }

    // local-time estimate at x: occupation(bin(x)) / bin_width
    double density(double x) const { return occupation(bin_index(x)) / dx_; }

    void add(double x, double dt) { add_bin(bin_index(x), dt); }

    void add_bin(std::int64_t bin, double dt) {
        if (occ_.empty() || bin < lo_ || bin > hi_bin()) grow(bin);
        occ_[static_cast<std::size_t>(bin - lo_)] += dt;
    }

    // sum of all occupations (pairwise, deterministic); equals elapsed time
    double total() const;

    // inclusive index range of allocated bins; [0, -1] when empty
    std::int64_t lo_bin() const { return lo_; }
    std::int64_t hi_bin() const { return lo_ + static_cast<std::int64_t>(occ_.size()) - 1; }
    bool empty() const { return occ_.empty(); }

  private:
    void grow(std::int64_t bin);

    double dx_;
    std::int64_t lo_ = 0;
    std::vector<double> occ_;
};

}
