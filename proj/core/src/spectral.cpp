#include "rbrw/spectral.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rbrw {

namespace {

constexpr double kUnderflowFloor = 1e-300;

int argmax(const std::vector<double>& v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

SpectralEstimate finalize(SpectralEstimate est) {
    est.root_estimates.resize(est.values.size());
    est.ratio_estimates.assign(est.values.size(), 0.0);
    for (std::size_t j = 0; j < est.values.size(); ++j) {
        est.root_estimates[j] = std::pow(est.values[j], 1.0 / est.steps[j]);
        if (j > 0 && est.values[j - 1] > 0.0) {
            double ratio = est.values[j] / est.values[j - 1];
            int span = est.steps[j] - est.steps[j - 1];
            est.ratio_estimates[j] = (span == 1) ? ratio : std::pow(ratio, 1.0 / span);
        }
    }
    est.value = est.ratio_estimates.back();
    return est;
}

SpectralEstimate theta_radial(const TreeKernelInfo& info, int n_max) {
    int n = info.branching;
    double p = info.p;
    auto profiles = tree_column_sum_profiles(n, p, n_max + 1);
    SpectralEstimate est;
    est.kind = SpectralEstimate::Kind::Theta;
    est.n_max = n_max;
    for (int step = 1; step <= n_max + 1; ++step) {
        const auto& w = profiles[static_cast<std::size_t>(step)];
        // entries up to index len-1-step are exact for the infinite tree;
        // beyond depth step+2 the profile is constant, so the max is exact
        int exact = static_cast<int>(w.size()) - step;
        double v = *std::max_element(w.begin(), w.begin() + exact);
        est.steps.push_back(step);
        est.values.push_back(v);
    }
    if (est.values.back() < kUnderflowFloor) {
        throw TruncationTooShallow("theta iterates underflowed");
    }
    return finalize(est);
}

SpectralEstimate theta_matrix(const Kernel& kernel, int n_max) {
    SpectralEstimate est;
    est.kind = SpectralEstimate::Kind::Theta;
    est.n_max = n_max;
    std::vector<double> w(kernel.vertex_count(), 0.0);
    for (int x = 0; x < kernel.vertex_count(); ++x) {
        if (kernel.row_sum(x) > 0.0) w[x] = 1.0;
    }
    auto dist = kernel.distance_to_boundary();
    int tracked = -1;
    for (int step = 1; step <= n_max + 1; ++step) {
        w = kernel.apply_transpose(w);
        tracked = argmax(w);
        double v = w[tracked];
        if (v < kUnderflowFloor) {
            throw TruncationTooShallow("theta column sums underflowed below 1e-300");
        }
        est.steps.push_back(step);
        est.values.push_back(v);
    }
    if (dist[tracked] < n_max + 2) {
        throw TruncationTooShallow(
            "kernel truncation too shallow: tracked maximum is " +
            std::to_string(dist[tracked]) + " steps from the boundary, need " +
            std::to_string(n_max + 2));
    }
    return finalize(est);
}

SpectralEstimate rho_radial(const TreeKernelInfo& info, int n_max) {
    auto returns = tree_return_probabilities(info.branching, info.p, n_max + 2);
    SpectralEstimate est;
    est.kind = SpectralEstimate::Kind::Rho;
    est.n_max = n_max;
    for (int step = 2; step <= n_max + 2; step += 2) {
        est.steps.push_back(step);
        est.values.push_back(returns[static_cast<std::size_t>(step)]);
    }
    if (est.values.back() < kUnderflowFloor) {
        throw TruncationTooShallow("return probabilities underflowed below 1e-300");
    }
    return finalize(est);
}

SpectralEstimate rho_matrix(const Kernel& kernel, int x, int n_max) {
    auto dist = kernel.distance_to_boundary();
    if (dist[x] < n_max + 2) {
        throw TruncationTooShallow(
            "kernel truncation too shallow: vertex is " + std::to_string(dist[x]) +
            " steps from the boundary, need " + std::to_string(n_max + 2));
    }
    SpectralEstimate est;
    est.kind = SpectralEstimate::Kind::Rho;
    est.n_max = n_max;
    std::vector<double> u(kernel.vertex_count(), 0.0);
    u[x] = 1.0;
    for (int step = 1; step <= n_max + 2; ++step) {
        u = kernel.apply_transpose(u);
        if (step % 2 == 0) {
            est.steps.push_back(step);
            est.values.push_back(u[x]);
            if (u[x] < kUnderflowFloor) {
                throw TruncationTooShallow("return probabilities underflowed below 1e-300");
            }
        }
    }
    return finalize(est);
}

}  // namespace

SpectralEstimate theta_estimate(const Kernel& kernel, int n_max) {
    if (n_max < 2) throw std::invalid_argument("theta_estimate needs n_max >= 2");
    if (kernel.tree) return theta_radial(*kernel.tree, n_max);
    return theta_matrix(kernel, n_max);
}

SpectralEstimate rho_estimate(const Kernel& kernel, int x, int n_max) {
    if (n_max < 4 || n_max % 2 != 0) {
        throw std::invalid_argument("rho_estimate needs even n_max >= 4");
    }
    if (x < 0 || x >= kernel.vertex_count()) throw std::invalid_argument("vertex out of range");
    if (kernel.tree) return rho_radial(*kernel.tree, n_max);
    return rho_matrix(kernel, x, n_max);
}

TreeClosedForms tree_closed_forms(int n, double p) {
    if (n < 2) throw std::invalid_argument("tree closed forms need n >= 2");
    if (p < 0.0 || p > 1.0 / n + 1e-15) {
        throw std::invalid_argument("tree closed forms need p in [0, 1/n]");
    }
    TreeClosedForms out{};
    out.rho = (p <= 1.0 / (2 * n)) ? 1.0 : 2.0 * std::sqrt(n * p * (1.0 - n * p));
    double lo = n - (static_cast<double>(n) * n - 1.0) * p;
    if (p >= 1.0 / (n + 1)) {
        out.theta_lo = out.theta_hi = lo;
        out.theta_exact = true;
    } else {
        out.theta_lo = lo;
        out.theta_hi = (n + 1) * (1.0 - n * p);
        out.theta_exact = false;
    }
    return out;
}

std::vector<std::vector<double>> tree_column_sum_profiles(int n, double p, int steps) {
    // w_{k+1}(m) = p w_k(m-1) + n(1-np) w_k(m+1) for m >= 2, with the root
    // and depth-1 rows getting the 1/(n+1) and (n+1)(1-np) weights.
    int len = 2 * steps + 4;
    double inward = 1.0 - n * p;
    std::vector<std::vector<double>> profiles;
    profiles.reserve(static_cast<std::size_t>(steps) + 1);
    std::vector<double> w(static_cast<std::size_t>(len), 1.0);
    profiles.push_back(w);
    for (int k = 1; k <= steps; ++k) {
        std::vector<double> next(static_cast<std::size_t>(len), 0.0);
        next[0] = (n + 1) * inward * w[1];
        next[1] = w[0] / (n + 1) + n * inward * w[2];
        for (int m = 2; m + 1 < len; ++m) {
            next[static_cast<std::size_t>(m)] = p * w[static_cast<std::size_t>(m - 1)] +
                                                n * inward * w[static_cast<std::size_t>(m + 1)];
        }
        next[static_cast<std::size_t>(len - 1)] = p * w[static_cast<std::size_t>(len - 2)];
        w = std::move(next);
        profiles.push_back(w);
    }
    return profiles;
}

std::vector<double> tree_return_probabilities(int n, double p, int max_steps) {
    // Radial projection of the biased walk: a birth-death chain on depth
    // with q(0,1) = 1, q(m,m+1) = np, q(m,m-1) = 1-np for m >= 1.
    int len = max_steps + 2;
    double up = n * p, down = 1.0 - n * p;
    std::vector<double> u(static_cast<std::size_t>(len), 0.0);
    u[0] = 1.0;
    std::vector<double> returns(static_cast<std::size_t>(max_steps) + 1, 0.0);
    returns[0] = 1.0;
    for (int k = 1; k <= max_steps; ++k) {
        std::vector<double> next(static_cast<std::size_t>(len), 0.0);
        next[1] += u[0];
        for (int m = 1; m < len; ++m) {
            if (u[static_cast<std::size_t>(m)] == 0.0) continue;
            if (m + 1 < len) next[static_cast<std::size_t>(m + 1)] += up * u[static_cast<std::size_t>(m)];
            next[static_cast<std::size_t>(m - 1)] += down * u[static_cast<std::size_t>(m)];
        }
        u = std::move(next);
        returns[static_cast<std::size_t>(k)] = u[0];
    }
    return returns;
}

ThetaSignVerdict theta_sign_via_test_function(const Kernel& kernel,
                                              const std::vector<double>& nu) {
    if (static_cast<int>(nu.size()) != kernel.vertex_count()) {
        throw std::invalid_argument("test function size mismatch");
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : nu) {
        if (v < 0.0) throw std::invalid_argument("test function must be nonnegative");
        if (v > 0.0) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (hi == 0.0) throw std::invalid_argument("test function must not be identically zero");

    auto pt_nu = kernel.apply_transpose(nu);
    ThetaSignVerdict verdict;
    verdict.comparability = hi / lo;
    verdict.theta_le_one = true;   // nu superharmonic for P^T
    verdict.theta_ge_one = true;   // nu subharmonic for P^T
    const double eps = 1e-12 * hi;
    for (int x = 0; x < kernel.vertex_count(); ++x) {
        if (nu[x] < pt_nu[x] - eps) verdict.theta_le_one = false;
        if (nu[x] > pt_nu[x] + eps) verdict.theta_ge_one = false;
    }
    return verdict;
}

}  // namespace rbrw
