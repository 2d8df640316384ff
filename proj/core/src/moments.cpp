#include "rbrw/moments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rbrw {

namespace {

// Spectral radius of P^T as the two-step ratio of sup column sums (the
// two-step ratio is insensitive to period-2 structure).
double estimate_theta_hat(const Eigen::MatrixXd& P) {
    int n = static_cast<int>(P.rows());
    if (n == 0) return 0.0;
    Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    double r1 = 0.0, r2 = 0.0;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd next = P.transpose() * w;
        double m = next.maxCoeff();
        if (m <= 0.0) return 0.0;
        r2 = r1;
        r1 = m;  // w is normalized to max 1, so the one-step ratio is m
        w = next / m;
    }
    return std::sqrt(r1 * r2);
}

struct PairState {
    Eigen::VectorXd m;
    Eigen::MatrixXd C;
    bool with_pairs = false;
};

PairState derivative(const MomentSystem& sys, const PairState& s) {
    PairState d;
    d.with_pairs = s.with_pairs;
    d.m = sys.lambda * (sys.P.transpose() * s.m) - sys.gamma * s.m + sys.forcing();
    if (s.with_pairs) {
        d.C = -2.0 * sys.gamma * s.C + 2.0 * sys.lambda * apply_pair_operator(sys.P, s.C) +
              pair_forcing(sys, s.m);
    }
    return d;
}

PairState axpy(const PairState& a, double h, const PairState& b) {
    PairState out;
    out.with_pairs = a.with_pairs;
    out.m = a.m + h * b.m;
    if (a.with_pairs) out.C = a.C + h * b.C;
    return out;
}

PairState rk4_step(const MomentSystem& sys, const PairState& s, double h) {
    PairState k1 = derivative(sys, s);
    PairState k2 = derivative(sys, axpy(s, h / 2, k1));
    PairState k3 = derivative(sys, axpy(s, h / 2, k2));
    PairState k4 = derivative(sys, axpy(s, h, k3));
    PairState out;
    out.with_pairs = s.with_pairs;
    out.m = s.m + (h / 6) * (k1.m + 2 * k2.m + 2 * k3.m + k4.m);
    if (s.with_pairs) out.C = s.C + (h / 6) * (k1.C + 2 * k2.C + 2 * k3.C + k4.C);
    return out;
}

double error_norm(const PairState& a, const PairState& b) {
    double e = (a.m - b.m).cwiseAbs().maxCoeff();
    if (a.with_pairs) e = std::max(e, (a.C - b.C).cwiseAbs().maxCoeff());
    return e;
}

double state_scale(const PairState& s) {
    double sc = s.m.size() ? s.m.cwiseAbs().maxCoeff() : 0.0;
    if (s.with_pairs && s.C.size()) sc = std::max(sc, s.C.cwiseAbs().maxCoeff());
    return sc;
}

// Step-doubling control around the 4th-order step; h is capped at
// 0.1/(lambda+gamma) which keeps the scheme comfortably inside its
// stability region for these systems.
PairState integrate_to(const MomentSystem& sys, PairState s, double t_from, double t_to) {
    const double h_max = 0.1 / std::max(sys.lambda + sys.gamma, 1e-12);
    const double rtol = 1e-10, atol = 1e-13;
    double t = t_from;
    double h = std::min(h_max, t_to - t_from);
    while (t < t_to) {
        h = std::min(h, t_to - t);
        if (h <= 0.0) break;
        PairState full = rk4_step(sys, s, h);
        PairState half = rk4_step(sys, rk4_step(sys, s, h / 2), h / 2);
        double err = error_norm(full, half) / 15.0;
        double tol = atol + rtol * std::max(state_scale(s), state_scale(half));
        if (err > tol && h > 1e-12) {
            h /= 2;
            continue;
        }
        s = half;
        t += h;
        if (err < tol / 32 && h < h_max) h = std::min(h * 2, h_max);
    }
    return s;
}

void check_grid(const std::vector<double>& t_grid) {
    double prev = 0.0;
    for (double t : t_grid) {
        if (!std::isfinite(t) || t < prev) {
            throw std::invalid_argument("time grid must be finite and nondecreasing from 0");
        }
        prev = t;
    }
}

void check_initial(const MomentSystem& sys, const Eigen::VectorXd& xi0) {
    if (xi0.size() != sys.dim()) throw std::invalid_argument("initial vector size mismatch");
    if (!xi0.allFinite() || xi0.minCoeff() < 0.0) {
        throw std::invalid_argument("initial moments must be finite and nonnegative");
    }
}

}  // namespace

MomentSystem make_moment_system(const Kernel& kernel, const VertexSet& region, double lambda,
                                double gamma, int k) {
    if (region.empty()) throw std::invalid_argument("moment system needs a nonempty region");
    if (lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
    if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
    if (k < 0) throw std::invalid_argument("immortal floor must be >= 0");
    MomentSystem sys;
    sys.sites = region.members();
    sys.lambda = lambda;
    sys.gamma = gamma;
    sys.k = k;
    int n = static_cast<int>(sys.sites.size());
    std::vector<int> local(static_cast<std::size_t>(kernel.vertex_count()), -1);
    for (int i = 0; i < n; ++i) local[static_cast<std::size_t>(sys.sites[i])] = i;
    sys.P = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (const auto& e : kernel.rows[static_cast<std::size_t>(sys.sites[i])]) {
            int j = local[static_cast<std::size_t>(e.target)];
            if (j >= 0) sys.P(i, j) += e.weight;
        }
    }
    sys.colsums = sys.P.colwise().sum();
    sys.theta_hat = estimate_theta_hat(sys.P);
    return sys;
}

FirstMomentSolution first_moment(const MomentSystem& system, const Eigen::VectorXd& xi0,
                                 const std::vector<double>& t_grid) {
    check_initial(system, xi0);
    check_grid(t_grid);
    FirstMomentSolution sol;
    PairState s;
    s.m = xi0;
    s.with_pairs = false;
    double t = 0.0;
    for (double target : t_grid) {
        s = integrate_to(system, s, t, target);
        t = target;
        sol.t.push_back(target);
        sol.m.push_back(s.m);
    }
    return sol;
}

SecondMomentSolution second_moment(const MomentSystem& system, const Eigen::VectorXd& xi0,
                                   const std::vector<double>& t_grid, int max_pair_dim) {
    check_initial(system, xi0);
    check_grid(t_grid);
    if (system.dim() > max_pair_dim) {
        throw BudgetExceeded("pair system dimension " + std::to_string(system.dim()) +
                             "^2 exceeds the configured budget");
    }
    SecondMomentSolution sol;
    PairState s;
    s.m = xi0;
    s.C = xi0 * xi0.transpose();
    s.with_pairs = true;
    double t = 0.0;
    for (double target : t_grid) {
        s = integrate_to(system, s, t, target);
        t = target;
        sol.t.push_back(target);
        sol.m.push_back(s.m);
        sol.C.push_back(s.C);
    }
    return sol;
}

Eigen::MatrixXd apply_pair_operator(const Eigen::MatrixXd& P, const Eigen::MatrixXd& C) {
    return 0.5 * (P.transpose() * C + C * P);
}

Eigen::MatrixXd pair_forcing(const MomentSystem& system, const Eigen::VectorXd& m) {
    int n = system.dim();
    double lam = system.lambda, gam = system.gamma;
    double k = system.k;
    Eigen::MatrixXd F = lam * k *
                        (m * system.colsums.transpose() + system.colsums * m.transpose());
    Eigen::VectorXd ptm = system.P.transpose() * m;
    for (int x = 0; x < n; ++x) {
        F(x, x) += lam * (k * system.colsums(x) + ptm(x)) + gam * m(x);
    }
    return F;
}

SteadyState steady_state(const MomentSystem& system, int max_pair_dim) {
    if (!system.stable()) {
        throw UnstableRegime("steady state requires gamma > lambda * theta; got gamma=" +
                             std::to_string(system.gamma) + ", lambda*theta=" +
                             std::to_string(system.lambda * system.theta_hat));
    }
    if (system.dim() > max_pair_dim) {
        throw BudgetExceeded("pair system dimension exceeds the configured budget");
    }
    int n = system.dim();
    Eigen::MatrixXd A =
        system.gamma * Eigen::MatrixXd::Identity(n, n) - system.lambda * system.P.transpose();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    SteadyState out;
    out.m = lu.solve(system.forcing());
    Eigen::MatrixXd Ainv = lu.inverse();
    out.condition = A.cwiseAbs().colwise().sum().maxCoeff() *
                    Ainv.cwiseAbs().colwise().sum().maxCoeff();

    // Pair steady state by fixed point: C = (F + 2 lambda B C) / (2 gamma),
    // a contraction with factor lambda * theta(B) / gamma < 1 here.
    Eigen::MatrixXd F = pair_forcing(system, out.m);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    double scale = std::max(1.0, F.cwiseAbs().maxCoeff());
    for (int it = 0; it < 100000; ++it) {
        Eigen::MatrixXd next =
            (F + 2.0 * system.lambda * apply_pair_operator(system.P, C)) / (2.0 * system.gamma);
        double delta = (next - C).cwiseAbs().maxCoeff();
        C = next;
        if (delta < 1e-14 * scale) break;
    }
    out.C = C;
    double k = system.k;
    out.U1 = (out.m.size() ? out.m.maxCoeff() : 0.0) + k;
    double u2 = 0.0;
    for (int x = 0; x < n; ++x) u2 = std::max(u2, C(x, x) + 2.0 * k * out.m(x) + k * k);
    out.U2 = u2;
    return out;
}

Eigen::VectorXd poissonized_apply(const Eigen::MatrixXd& Q, double lambda, double t,
                                  const Eigen::VectorXd& v) {
    if (t < 0.0) throw std::invalid_argument("time must be nonnegative");
    if (t == 0.0 || lambda == 0.0) return v;
    double row_norm = Q.cwiseAbs().rowwise().sum().maxCoeff();
    double rate = lambda * t * std::max(1.0, row_norm);
    // tail cutoff on the inflated rate; cap from the Poisson tail profile
    int n_cap = static_cast<int>(rate + 12.0 * std::sqrt(rate) + 20.0);
    Eigen::VectorXd term = v;
    double log_weight = -lambda * t;  // log of e^{-lambda t} (lambda t)^n / n!
    Eigen::VectorXd sum = std::exp(log_weight) * term;
    double log_tail_weight = -rate;
    double tail_cum = std::exp(log_tail_weight);
    for (int n = 1; n <= n_cap; ++n) {
        term = Q * term;
        log_weight += std::log(lambda * t / n);
        sum += std::exp(log_weight) * term;
        log_tail_weight += std::log(rate / n);
        tail_cum += std::exp(log_tail_weight);
        if (1.0 - tail_cum < 1e-12 && n > lambda * t) break;
    }
    return sum;
}

Eigen::VectorXd explicit_solution(const Eigen::MatrixXd& Q, double lambda, double beta,
                                  const Eigen::VectorXd& phi,
                                  const std::function<Eigen::VectorXd(double)>& f, double t) {
    if (t < 0.0) throw std::invalid_argument("time must be nonnegative");
    Eigen::VectorXd u = std::exp(beta * t) * poissonized_apply(Q, lambda, t, phi);
    if (!f || t == 0.0) return u;

    // convolution integral over tau = t - s via composite Gauss-Legendre
    static const double nodes[8] = {-0.9602898564975363, -0.7966664774136267,
                                    -0.5255324099163290, -0.1834346424956498,
                                    0.1834346424956498,  0.5255324099163290,
                                    0.7966664774136267,  0.9602898564975363};
    static const double wts[8] = {0.1012285362903763, 0.2223810344533745,
                                  0.3137066458778873, 0.3626837833783620,
                                  0.3626837833783620, 0.3137066458778873,
                                  0.2223810344533745, 0.1012285362903763};
    int segments = std::max(8, static_cast<int>(std::ceil(t * std::max(1.0, lambda) * 4)));
    double h = t / segments;
    Eigen::VectorXd integral = Eigen::VectorXd::Zero(phi.size());
    for (int seg = 0; seg < segments; ++seg) {
        double a = seg * h;
        for (int q = 0; q < 8; ++q) {
            double tau = a + h * 0.5 * (nodes[q] + 1.0);
            Eigen::VectorXd g =
                std::exp(beta * tau) * poissonized_apply(Q, lambda, tau, f(t - tau));
            integral += (wts[q] * h * 0.5) * g;
        }
    }
    return u + integral;
}

}  // namespace rbrw
