#pragma once

#include <vector>

namespace rbrw {

// Nonincreasing breeding function c: N -> R+, stored as a finite table plus
// a constant tail (every construction used here is eventually constant).
// c(0) is the attempt intensity lambda; a birth attempt onto a site holding
// j particles succeeds with probability c(j)/c(0).
class RateProfile {
public:
    RateProfile() = default;

    static RateProfile constant(double lambda);                         // BRW
    static RateProfile contact_process(double lambda);                  // c = lambda*1_{0}
    static RateProfile step(double high, int threshold, double low);    // high on [0,threshold)
    static RateProfile from_table(std::vector<double> table, double tail);

    double operator()(long long k) const {
        if (k < static_cast<long long>(table_.size())) return table_[static_cast<std::size_t>(k)];
        return tail_;
    }

    double lambda() const { return table_.front(); }
    double tail() const { return tail_; }
    int table_size() const { return static_cast<int>(table_.size()); }

    // c_n = c * 1_{[0, n-1]}.
    RateProfile truncated(int n) const;

    // Pointwise c <= other over the tabulated ranges and tails.
    bool dominated_by(const RateProfile& other) const;

private:
    std::vector<double> table_;  // c(0..K), nonincreasing
    double tail_ = 0.0;          // c(k) for k > K
};

// Hypothesis of the nested-coupling construction for a component pair:
// lower(k_upper + m) <= upper(k_upper + m) for all m >= 0.
bool profiles_coupling_compatible(const RateProfile& lower, const RateProfile& upper,
                                  int k_upper);

}  // namespace rbrw
