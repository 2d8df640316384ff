#include "rbrw/invariant.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "rbrw/replicas.hpp"
#include "rbrw/spectral.hpp"

namespace rbrw {

namespace {

// Inverse standard-normal CDF (Acklam's rational approximation), used to
// hold per-site sweeps at a family-level significance.
double normal_quantile(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("quantile needs p in (0,1)");
    double q, r;
    if (p < p_low) {
        q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p <= 1 - p_low) {
        q = p - 0.5;
        r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    }
    q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
}

// z threshold for m simultaneous two-sided comparisons at the overall
// 3-sigma level (never below 3).
double family_z(int comparisons) {
    double alpha = 0.0026997960632601866;  // two-sided 3-sigma
    double per_test = alpha / std::max(1, comparisons);
    return std::max(3.0, normal_quantile(1.0 - per_test / 2.0));
}

// Time-weighted occupancy accumulator for one replica: per-site mass of
// each occupancy level over a window, flushed lazily on site changes.
struct WindowAccumulator {
    double window_start, window_end;
    std::vector<double> last_change;
    std::vector<int> occ;
    std::vector<std::vector<double>> mass;  // [site][occupancy] -> time mass

    WindowAccumulator(int sites, int cap, double start, double end)
        : window_start(start),
          window_end(end),
          last_change(static_cast<std::size_t>(sites), start),
          occ(static_cast<std::size_t>(sites), 0),
          mass(static_cast<std::size_t>(sites),
               std::vector<double>(static_cast<std::size_t>(cap) + 1, 0.0)) {}

    void credit(int site, double until) {
        double from = std::max(last_change[static_cast<std::size_t>(site)], window_start);
        double to = std::min(until, window_end);
        if (to > from) {
            mass[static_cast<std::size_t>(site)][static_cast<std::size_t>(
                occ[static_cast<std::size_t>(site)])] += to - from;
        }
    }

    void change(int site, double when, int new_occ) {
        credit(site, when);
        occ[static_cast<std::size_t>(site)] = new_occ;
        last_change[static_cast<std::size_t>(site)] = when;
    }

    void finish() {
        for (std::size_t s = 0; s < occ.size(); ++s) credit(static_cast<int>(s), window_end);
    }
};

}  // namespace

double MuEstimate::tail_probability(double r) const {
    double p = 0.0;
    for (std::size_t j = 0; j < pooled_hist.size(); ++j) {
        if (static_cast<double>(j) > r) p += pooled_hist[j];
    }
    return p;
}

MuEstimate estimate_mu_n(int n, const Kernel& kernel, const RateProfile& profile, double t_burn,
                         double t_sample, int replicas, std::uint64_t seed, int jobs) {
    if (n < 1) throw std::invalid_argument("truncation level must be >= 1");
    if (t_sample <= 0.0) throw std::invalid_argument("sampling window must be positive");
    if (replicas < 1) throw std::invalid_argument("need at least one replica");

    const int V = kernel.vertex_count();
    RateProfile truncated = profile.truncated(n);
    VertexSet region = VertexSet::all(V);
    Configuration start = Configuration::uniform(V, n);

    MuEstimate est;
    est.n = n;
    est.t_burn = t_burn;
    est.t_sample = t_sample;
    est.replicas = replicas;
    est.seed = seed;

    struct ReplicaResult {
        std::vector<std::vector<double>> hist;  // normalized per-site distribution
        std::vector<double> site_mean;
        double first_half = 0.0, second_half = 0.0;
        int max_occ = 0;
    };
    std::vector<ReplicaResult> results(static_cast<std::size_t>(replicas));

    const double t_end = t_burn + t_sample;
    const double t_mid = t_burn + 0.5 * t_sample;

    run_replicas(replicas, jobs, seed, [&](int r, std::uint64_t stream) {
        WindowAccumulator acc(V, n, t_burn, t_end);
        WindowAccumulator first(V, n, t_burn, t_mid);
        WindowAccumulator second(V, n, t_mid, t_end);
        for (int v = 0; v < V; ++v) {
            acc.occ[static_cast<std::size_t>(v)] = n;
            first.occ[static_cast<std::size_t>(v)] = n;
            second.occ[static_cast<std::size_t>(v)] = n;
        }
        int max_occ = 0;
        SimParams params;
        params.gamma = 1.0;
        params.immortal_floor = 0;
        params.region = region;
        params.profile = truncated;
        params.t_end = t_end;
        params.seed = stream;
        auto observer = [&](const Event& ev, const Configuration&) {
            if (!ev.accepted) return;
            int site = ev.changed_vertex();
            if (ev.occ_after > n) {
                throw std::logic_error("occupancy exceeded the truncation level");
            }
            max_occ = std::max(max_occ, ev.occ_after);
            acc.change(site, ev.time, ev.occ_after);
            first.change(site, ev.time, ev.occ_after);
            second.change(site, ev.time, ev.occ_after);
        };
        run_sim(kernel, params, start, observer);
        acc.finish();
        first.finish();
        second.finish();

        ReplicaResult res;
        res.max_occ = std::max(max_occ, n);  // the start sits at the ceiling
        res.hist.assign(static_cast<std::size_t>(V),
                        std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
        res.site_mean.assign(static_cast<std::size_t>(V), 0.0);
        double pooled_first = 0.0, pooled_second = 0.0;
        for (int v = 0; v < V; ++v) {
            double total = 0.0;
            for (double m : acc.mass[static_cast<std::size_t>(v)]) total += m;
            for (std::size_t j = 0; j <= static_cast<std::size_t>(n); ++j) {
                double p = acc.mass[static_cast<std::size_t>(v)][j] / total;
                res.hist[static_cast<std::size_t>(v)][j] = p;
                res.site_mean[static_cast<std::size_t>(v)] += p * static_cast<double>(j);
            }
            double tf = 0.0, ts = 0.0, mf = 0.0, ms = 0.0;
            for (std::size_t j = 0; j <= static_cast<std::size_t>(n); ++j) {
                tf += first.mass[static_cast<std::size_t>(v)][j];
                ts += second.mass[static_cast<std::size_t>(v)][j];
                mf += first.mass[static_cast<std::size_t>(v)][j] * static_cast<double>(j);
                ms += second.mass[static_cast<std::size_t>(v)][j] * static_cast<double>(j);
            }
            pooled_first += mf / tf;
            pooled_second += ms / ts;
        }
        res.first_half = pooled_first / V;
        res.second_half = pooled_second / V;
        results[static_cast<std::size_t>(r)] = std::move(res);
    });

    est.site_hist.assign(static_cast<std::size_t>(V),
                         std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    est.site_mean.assign(static_cast<std::size_t>(V), 0.0);
    est.site_mean_se.assign(static_cast<std::size_t>(V), 0.0);
    est.pooled_hist.assign(static_cast<std::size_t>(n) + 1, 0.0);

    std::vector<double> pooled_per_replica, halves_diff, firsts, seconds;
    for (const auto& res : results) {
        est.max_occupancy_seen = std::max(est.max_occupancy_seen, res.max_occ);
        double pooled = 0.0;
        for (int v = 0; v < V; ++v) {
            for (std::size_t j = 0; j <= static_cast<std::size_t>(n); ++j) {
                est.site_hist[static_cast<std::size_t>(v)][j] +=
                    res.hist[static_cast<std::size_t>(v)][j] / replicas;
                est.pooled_hist[j] += res.hist[static_cast<std::size_t>(v)][j] / (replicas * V);
            }
            pooled += res.site_mean[static_cast<std::size_t>(v)];
        }
        pooled_per_replica.push_back(pooled / V);
        halves_diff.push_back(res.second_half - res.first_half);
        firsts.push_back(res.first_half);
        seconds.push_back(res.second_half);
    }
    for (int v = 0; v < V; ++v) {
        std::vector<double> means;
        means.reserve(results.size());
        for (const auto& res : results) means.push_back(res.site_mean[static_cast<std::size_t>(v)]);
        auto ms = mean_se(means);
        est.site_mean[static_cast<std::size_t>(v)] = ms.mean;
        est.site_mean_se[static_cast<std::size_t>(v)] = ms.se;
    }
    auto pooled = mean_se(pooled_per_replica);
    est.pooled_mean = pooled.mean;
    est.pooled_mean_se = pooled.se;
    est.first_half_mean = mean_se(firsts).mean;
    est.second_half_mean = mean_se(seconds).mean;
    est.half_diff_se = mean_se(halves_diff).se;
    return est;
}

bool MuDiagnostics::all_pass() const {
    for (const auto& c : checks) {
        if (c.applicable && !c.pass) return false;
    }
    return true;
}

std::string MuDiagnostics::report() const {
    std::ostringstream os;
    os << "invariant-measure diagnostics (theta_hat=" << theta_hat << ", k_bar=" << k_bar
       << ", U1=" << u1 << ")\n";
    if (k_bar < 0) {
        os << "[warn] profile tail never falls below 1/theta_hat: outside the "
              "bounded-equilibrium regime, tightness bounds unavailable\n";
    }
    for (const auto& c : checks) {
        os << (c.applicable ? (c.pass ? "[pass] " : "[FAIL] ") : "[n/a ] ") << c.name;
        if (!c.detail.empty()) os << ": " << c.detail;
        os << '\n';
    }
    return os.str();
}

MuDiagnostics mu_sequence_diagnostics(const std::vector<MuEstimate>& estimates,
                                      const Kernel& kernel, const RateProfile& profile,
                                      const std::vector<double>& r_grid) {
    if (estimates.size() < 2) {
        throw std::invalid_argument("need at least two estimates for sequence diagnostics");
    }
    for (std::size_t i = 1; i < estimates.size(); ++i) {
        if (estimates[i].n < estimates[i - 1].n) {
            throw std::invalid_argument("estimates must be ordered by increasing n");
        }
        if (static_cast<int>(estimates[i].site_mean.size()) != kernel.vertex_count()) {
            throw std::invalid_argument("estimate does not match the kernel's graph");
        }
    }
    MuDiagnostics diag;

    // Tightness bound from the moment module: k_bar = min{k : c(k) < 1/theta}.
    // Shallow truncations force smaller power counts (guard band).
    diag.theta_hat = 0.0;
    for (int n_max : {40, 20, 10, 4, 2}) {
        try {
            diag.theta_hat = theta_estimate(kernel, n_max).value;
            break;
        } catch (const TruncationTooShallow&) {
        }
    }
    if (diag.theta_hat <= 0.0) {
        throw std::invalid_argument("kernel too shallow for any theta estimate");
    }
    long long horizon = profile.table_size() + 1;
    for (long long k = 0; k <= horizon; ++k) {
        if (profile(k) < 1.0 / diag.theta_hat) {
            diag.k_bar = static_cast<int>(k);
            break;
        }
    }
    if (diag.k_bar >= 0) {
        auto system = make_moment_system(kernel, VertexSet::all(kernel.vertex_count()),
                                         profile(diag.k_bar), 1.0, diag.k_bar);
        diag.u1 = steady_state(system).U1;
    }

    const int V = kernel.vertex_count();
    // Per-site SEs from few replicas are heavy-tailed estimates; floor them
    // by the variance pooled across sites so per-site sweeps stay at their
    // nominal 3-sigma level.
    auto pooled_site_se = [V](const MuEstimate& est) {
        double s = 0.0;
        for (double se : est.site_mean_se) s += se * se;
        return std::sqrt(s / V);
    };
    auto site_se = [&](const MuEstimate& est, double floor_se, int v) {
        return std::max(est.site_mean_se[static_cast<std::size_t>(v)], floor_se);
    };
    {
        DiagnosticCheck c{"per-site means nondecreasing in n (3 pooled SE)", true, true, ""};
        for (std::size_t i = 0; i + 1 < estimates.size(); ++i) {
            const auto& lo = estimates[i];
            const auto& hi = estimates[i + 1];
            double flo = pooled_site_se(lo), fhi = pooled_site_se(hi);
            for (int v = 0; v < V; ++v) {
                double a = site_se(lo, flo, v), b = site_se(hi, fhi, v);
                double tol = 3.0 * std::sqrt(a * a + b * b);
                if (lo.site_mean[static_cast<std::size_t>(v)] >
                    hi.site_mean[static_cast<std::size_t>(v)] + tol) {
                    c.pass = false;
                    c.detail = "violated at site " + std::to_string(v) + " between n=" +
                               std::to_string(lo.n) + " and n=" + std::to_string(hi.n);
                }
            }
        }
        diag.checks.push_back(c);
    }
    {
        DiagnosticCheck c{"pooled CDFs stochastically ordered (3 pooled SE)", true, true, ""};
        for (std::size_t i = 0; i + 1 < estimates.size(); ++i) {
            const auto& lo = estimates[i];
            const auto& hi = estimates[i + 1];
            // larger n dominates: F_hi(j) <= F_lo(j) + tolerance
            double cum_lo = 0.0, cum_hi = 0.0;
            double tol = 3.0 * std::sqrt(lo.pooled_mean_se * lo.pooled_mean_se +
                                         hi.pooled_mean_se * hi.pooled_mean_se) +
                         1e-9;
            for (std::size_t j = 0; j < lo.pooled_hist.size(); ++j) {
                cum_lo += lo.pooled_hist[j];
                cum_hi += j < hi.pooled_hist.size() ? hi.pooled_hist[j] : 0.0;
                if (cum_hi > cum_lo + tol) {
                    c.pass = false;
                    c.detail = "CDF crossing at occupancy " + std::to_string(j);
                }
            }
        }
        diag.checks.push_back(c);
    }
    {
        DiagnosticCheck c{"per-site occupancy cap <= n", true, true, ""};
        for (const auto& est : estimates) {
            if (est.max_occupancy_seen > est.n) {
                c.pass = false;
                c.detail = "cap broken at n=" + std::to_string(est.n);
            }
        }
        diag.checks.push_back(c);
    }
    {
        DiagnosticCheck c{"tightness: sup_n pooled mean <= U1", false, diag.k_bar >= 0, ""};
        if (diag.k_bar >= 0) {
            c.pass = true;
            for (const auto& est : estimates) {
                if (est.pooled_mean > diag.u1 + 3.0 * est.pooled_mean_se) {
                    c.pass = false;
                    c.detail = "pooled mean " + std::to_string(est.pooled_mean) + " at n=" +
                               std::to_string(est.n) + " exceeds U1=" + std::to_string(diag.u1);
                }
            }
        } else {
            c.detail = "profile never falls below 1/theta; bound unavailable";
        }
        diag.checks.push_back(c);
    }
    {
        DiagnosticCheck c{"Chebyshev tails P(eta > r) <= U1/r", false, diag.k_bar >= 0, ""};
        if (diag.k_bar >= 0) {
            c.pass = true;
            std::ostringstream detail;
            for (double r : r_grid) {
                double bound = diag.u1 / r;
                for (const auto& est : estimates) {
                    double tail = est.tail_probability(r);
                    if (tail > bound) {
                        c.pass = false;
                        detail << " n=" << est.n << " r=" << r << " tail=" << tail
                               << " bound=" << bound << ";";
                    }
                }
            }
            c.detail = detail.str();
        } else {
            c.detail = "bound unavailable";
        }
        diag.checks.push_back(c);
    }
    {
        DiagnosticCheck c{"stationarity: window halves agree (3 pooled SE)", true, true, ""};
        for (const auto& est : estimates) {
            double diff = std::abs(est.second_half_mean - est.first_half_mean);
            if (diff > 3.0 * est.half_diff_se) {
                c.pass = false;
                c.detail = "drift at n=" + std::to_string(est.n) + ": halves differ by " +
                           std::to_string(diff);
            }
        }
        diag.checks.push_back(c);
    }
    {
        bool transitive = kernel.graph->family == GraphFamily::LatticeTorus;
        DiagnosticCheck c{"torus symmetry: per-site means equal (3 SE)", true, transitive, ""};
        if (transitive) {
            // the deviation here is exactly zero in law, so the sweep over
            // V * #estimates sites is held at the family 3-sigma level
            double z = family_z(V * static_cast<int>(estimates.size()));
            for (const auto& est : estimates) {
                double floor_se = pooled_site_se(est);
                for (int v = 0; v < V; ++v) {
                    double tol = z * site_se(est, floor_se, v);
                    if (std::abs(est.site_mean[static_cast<std::size_t>(v)] - est.pooled_mean) >
                        tol) {
                        c.pass = false;
                        c.detail = "site " + std::to_string(v) + " deviates at n=" +
                                   std::to_string(est.n);
                    }
                }
            }
        }
        diag.checks.push_back(c);
    }
    return diag;
}

}  // namespace rbrw
