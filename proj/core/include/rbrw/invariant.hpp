#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rbrw/moments.hpp"
#include "rbrw/simulate.hpp"

namespace rbrw {

// Long-run estimate of the invariant measure mu_n of the dynamics with
// truncated rates c_n = c*1_{[0,n-1]}, started from n*1 (the monotone
// system relaxes downward from its ceiling). Statistics are time averages
// over [t_burn, t_burn + t_sample], aggregated over independent replicas.
struct MuEstimate {
    int n = 0;
    double t_burn = 0.0;
    double t_sample = 0.0;
    int replicas = 0;
    std::uint64_t seed = 0;

    // hist[site][j]: time-averaged probability of occupancy j at the site
    std::vector<std::vector<double>> site_hist;
    std::vector<double> site_mean;
    std::vector<double> site_mean_se;     // across replicas
    std::vector<double> pooled_hist;      // site-averaged occupancy distribution
    double pooled_mean = 0.0;
    double pooled_mean_se = 0.0;
    // window halves of the pooled mean, for the stationarity diagnostic
    double first_half_mean = 0.0;
    double second_half_mean = 0.0;
    double half_diff_se = 0.0;
    int max_occupancy_seen = 0;

    double tail_probability(double r) const;  // pooled P(eta(x) > r)
};

MuEstimate estimate_mu_n(int n, const Kernel& kernel, const RateProfile& profile, double t_burn,
                         double t_sample, int replicas, std::uint64_t seed, int jobs = 1);

struct DiagnosticCheck {
    std::string name;
    bool pass = false;
    bool applicable = true;
    std::string detail;
};

struct MuDiagnostics {
    std::vector<DiagnosticCheck> checks;
    double u1 = 0.0;          // moment bound at (k_bar, c(k_bar), gamma = 1)
    int k_bar = -1;           // min{k : c(k) < 1/theta_hat}, -1 if none
    double theta_hat = 0.0;

    bool all_pass() const;
    std::string report() const;  // structured text, one pass/fail line per check
};

// Diagnostics over a ladder of estimates with increasing n on the same
// kernel/profile: stochastic monotonicity of means and CDFs (3 pooled SE),
// the tightness bound sup_n mean <= U1, Chebyshev tails P(eta > r) <= U1/r
// over r_grid, window-half stationarity, and symmetry of per-site means on
// vertex-transitive families.
MuDiagnostics mu_sequence_diagnostics(const std::vector<MuEstimate>& estimates,
                                      const Kernel& kernel, const RateProfile& profile,
                                      const std::vector<double>& r_grid = {5, 10, 20});

}  // namespace rbrw
