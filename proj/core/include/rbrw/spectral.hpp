#pragma once

#include <vector>

#include "rbrw/graph.hpp"

namespace rbrw {

// Power-iteration record for one of the two phase parameters. values[j] is
// the tracked quantity at step n = step_of(j): sup-column-sums of P^n for
// theta, even-step return probabilities for rho. Both the n-th-root and the
// successive-ratio extrapolations are kept; `value` is the ratio estimate
// (the n-th roots carry an O(log n / n) bias and are reported as
// diagnostics only).
struct SpectralEstimate {
    enum class Kind { Theta, Rho };
    enum class Extrapolation { Ratio, NthRoot };

    Kind kind = Kind::Theta;
    Extrapolation extrapolation = Extrapolation::Ratio;  // estimator behind `value`
    int n_max = 0;
    std::vector<int> steps;
    std::vector<double> values;
    std::vector<double> root_estimates;
    std::vector<double> ratio_estimates;
    double value = 0.0;
};

// theta = lim_n (sup_x sum_y p^(n)(y,x))^(1/n), the spectral radius of P^T
// on bounded functions. Kernels carrying tree info use the exact radial
// recursion for the infinite tree; generic kernels iterate w <- P^T w from
// w = 1 and require a guard band of n_max + 2 between the tracked maximum
// and any mass-losing row.
SpectralEstimate theta_estimate(const Kernel& kernel, int n_max);

// rho = limsup_n p^(n)(x,y)^(1/n) via even-step return probabilities at x.
// n_max must be even and >= 4. Tree kernels use the radial birth-death
// projection of the walk (rooted at the tree root, any x).
SpectralEstimate rho_estimate(const Kernel& kernel, int x, int n_max);

// Closed forms for the biased kernel on the infinite tree T_{n+1},
// p in [0, 1/n]. theta_lo == theta_hi on [1/(n+1), 1/n] where theta is
// exact; below 1/(n+1) only the bounds are known.
struct TreeClosedForms {
    double rho;
    double theta_lo;
    double theta_hi;
    bool theta_exact;
};

TreeClosedForms tree_closed_forms(int n, double p);

// Exact radial arrays for the biased tree (column sums of P^k and return
// probabilities depend only on depth). Array length 2*steps + 4 makes the
// first `steps` iterations agree with the infinite tree.
std::vector<std::vector<double>> tree_column_sum_profiles(int n, double p, int steps);
std::vector<double> tree_return_probabilities(int n, double p, int max_steps);

// Sign test for theta via a nonnegative test function nu (comparable on its
// support): nu >= P^T nu everywhere gives theta <= 1, nu <= P^T nu gives
// theta >= 1; equality gives both.
struct ThetaSignVerdict {
    bool theta_le_one = false;
    bool theta_ge_one = false;
    double comparability = 0.0;  // max/min of nu over its support

    bool inconclusive() const { return !theta_le_one && !theta_ge_one; }
};

ThetaSignVerdict theta_sign_via_test_function(const Kernel& kernel,
                                              const std::vector<double>& nu);

}  // namespace rbrw
