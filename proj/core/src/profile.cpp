#include "rbrw/profile.hpp"

#include <algorithm>
#include <stdexcept>

namespace rbrw {

namespace {

void validate(const std::vector<double>& table, double tail) {
    if (table.empty()) throw std::invalid_argument("rate profile needs c(0)");
    if (!(table.front() > 0.0)) throw std::invalid_argument("rate profile needs lambda = c(0) > 0");
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (table[i] < 0.0) throw std::invalid_argument("rate profile must be nonnegative");
        if (i + 1 < table.size() && table[i] < table[i + 1]) {
            throw std::invalid_argument("rate profile must be nonincreasing");
        }
    }
    if (tail < 0.0 || tail > table.back()) {
        throw std::invalid_argument("rate profile tail must satisfy 0 <= tail <= c(K)");
    }
}

}  // namespace

RateProfile RateProfile::constant(double lambda) { return from_table({lambda}, lambda); }

RateProfile RateProfile::contact_process(double lambda) { return from_table({lambda}, 0.0); }

RateProfile RateProfile::step(double high, int threshold, double low) {
    if (threshold < 1) throw std::invalid_argument("step profile needs threshold >= 1");
    std::vector<double> table(static_cast<std::size_t>(threshold), high);
    table.push_back(low);
    return from_table(std::move(table), low);
}

RateProfile RateProfile::from_table(std::vector<double> table, double tail) {
    validate(table, tail);
    RateProfile p;
    p.table_ = std::move(table);
    p.tail_ = tail;
    return p;
}

RateProfile RateProfile::truncated(int n) const {
    if (n < 1) throw std::invalid_argument("truncation level must be >= 1");
    RateProfile p;
    p.table_.resize(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 0; k < n; ++k) p.table_[static_cast<std::size_t>(k)] = (*this)(k);
    p.tail_ = 0.0;
    validate(p.table_, p.tail_);
    return p;
}

bool RateProfile::dominated_by(const RateProfile& other) const {
    long long horizon = std::max(table_size(), other.table_size());
    for (long long k = 0; k <= horizon; ++k) {
        if ((*this)(k) > other(k) + 1e-15) return false;
    }
    return tail_ <= other.tail() + 1e-15;
}

bool profiles_coupling_compatible(const RateProfile& lower, const RateProfile& upper,
                                  int k_upper) {
    long long horizon = std::max(lower.table_size(), upper.table_size());
    for (long long m = 0; m <= horizon; ++m) {
        if (lower(k_upper + m) > upper(k_upper + m) + 1e-15) return false;
    }
    return lower.tail() <= upper.tail() + 1e-15;
}

}  // namespace rbrw
