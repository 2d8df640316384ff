#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "rbrw/graph.hpp"

namespace rbrw {

// Linear moment systems of the constant-profile process with immortal
// particles on a finite region. With xi = eta - k*1, the first moment
// m(t,x) = E[xi_t(x)] solves
//     dm/dt = lambda * P^T m - gamma * m + f,   f(x) = k*lambda*colsum(x),
// and the pair moment C(t,x,y) = E[xi_t(x) xi_t(y)] solves
//     dC/dt = -2 gamma C + lambda (P^T C + C P) + F(t),
// with F as assembled in pair_forcing(). eta-moments are recovered through
// E[eta] = m + k and E[eta(x)^2] = C(x,x) + 2k m(x) + k^2.
struct MomentSystem {
    std::vector<int> sites;   // global vertex ids of the region, sorted
    Eigen::MatrixXd P;        // restricted kernel on region x region
    Eigen::VectorXd colsums;  // sum_z p(z, x)
    double lambda = 0.0;
    double gamma = 1.0;
    int k = 0;
    double theta_hat = 0.0;   // spectral radius estimate of P^T

    int dim() const { return static_cast<int>(sites.size()); }
    bool stable() const { return gamma > lambda * theta_hat; }
    Eigen::VectorXd forcing() const { return k * lambda * colsums; }
};

MomentSystem make_moment_system(const Kernel& kernel, const VertexSet& region, double lambda,
                                double gamma, int k);

struct FirstMomentSolution {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> m;
};

// Integrates the first-moment system from xi0 through the time grid
// (classical 4th-order scheme, step-doubling control, step capped at
// 0.1/(lambda+gamma)).
FirstMomentSolution first_moment(const MomentSystem& system, const Eigen::VectorXd& xi0,
                                 const std::vector<double>& t_grid);

struct SecondMomentSolution {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> m;
    std::vector<Eigen::MatrixXd> C;
};

// Joint integration of (m, C) from a deterministic start xi0 (so
// C(0) = xi0 xi0^T). Refuses when dim^2 exceeds max_pair_dim^2.
SecondMomentSolution second_moment(const MomentSystem& system, const Eigen::VectorXd& xi0,
                                   const std::vector<double>& t_grid, int max_pair_dim = 200);

struct SteadyState {
    Eigen::VectorXd m;        // lim m(t, .)
    Eigen::MatrixXd C;        // lim C(t, ., .)
    double U1 = 0.0;          // sup_x lim E[eta_t(x)]
    double U2 = 0.0;          // sup_x lim E[eta_t(x)^2]
    double condition = 0.0;   // 1-norm condition estimate of gamma*I - lambda*P^T
};

// Linear solves for both steady states; requires the stable regime
// gamma > lambda * theta_hat (throws UnstableRegime otherwise). The pair
// system is solved by fixed-point iteration, a contraction precisely in the
// stable regime.
SteadyState steady_state(const MomentSystem& system, int max_pair_dim = 200);

// One application of the pair operator B: (B C)(x,y) =
// (sum_z p(z,x) C(z,y) + sum_z C(x,z) p(z,y)) / 2.
Eigen::MatrixXd apply_pair_operator(const Eigen::MatrixXd& P, const Eigen::MatrixXd& C);

// Pair forcing F(t) of the second-moment system given m(t).
Eigen::MatrixXd pair_forcing(const MomentSystem& system, const Eigen::VectorXd& m);

// u(t,x) = e^{beta t} sum_y q_t(x,y) phi(y)
//        + sum_y int_0^t e^{beta(t-s)} q_{t-s}(x,y) f(s,y) ds
// with q_t the Poissonized kernel exp(lambda t (Q - I)). The series is
// truncated once the Poisson tail falls below 1e-12 (rate inflated by
// ||Q||_inf when that norm exceeds 1); the convolution uses composite
// Gauss-Legendre quadrature.
Eigen::VectorXd explicit_solution(const Eigen::MatrixXd& Q, double lambda, double beta,
                                  const Eigen::VectorXd& phi,
                                  const std::function<Eigen::VectorXd(double)>& f, double t);

// Poissonized kernel application: exp(lambda*t*(Q - I)) * v.
Eigen::VectorXd poissonized_apply(const Eigen::MatrixXd& Q, double lambda, double t,
                                  const Eigen::VectorXd& v);

}  // namespace rbrw
