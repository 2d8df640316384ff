#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>

#include "oracles.hpp"
#include "rbrw/moments.hpp"
#include "rbrw/replicas.hpp"
#include "rbrw/simulate.hpp"

using namespace rbrw;

namespace {

MomentSystem two_site_system(double lambda, double gamma, int k) {
    auto g = build_custom(2, {{0, 1}});
    Kernel kernel = build_simple_kernel(g);
    return make_moment_system(kernel, g->all_vertices(), lambda, gamma, k);
}

// Augmented autonomous system on z = [vec(C); m; 1] whose exponential is the
// oracle for the transient pair moments.
Eigen::MatrixXd augmented_matrix(const MomentSystem& sys) {
    int n = sys.dim();
    int nc = n * n;
    int dim = nc + n + 1;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd PT = sys.P.transpose();
    // dC/dt = -2 gamma C + lambda (P^T C + C P) + F(m); column-major vec
    Eigen::MatrixXd LC = -2.0 * sys.gamma * Eigen::MatrixXd::Identity(nc, nc) +
                         sys.lambda * (Eigen::kroneckerProduct(I, PT).eval() +
                                       Eigen::kroneckerProduct(PT, I).eval());
    M.topLeftCorner(nc, nc) = LC;
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd F0 = pair_forcing(sys, zero);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd ej = Eigen::VectorXd::Unit(n, j);
        Eigen::MatrixXd col = pair_forcing(sys, ej) - F0;
        M.block(0, nc + j, nc, 1) = Eigen::Map<const Eigen::VectorXd>(col.data(), nc);
    }
    M.block(0, nc + n, nc, 1) = Eigen::Map<const Eigen::VectorXd>(F0.data(), nc);
    // dm/dt = lambda P^T m - gamma m + k lambda colsums
    M.block(nc, nc, n, n) = sys.lambda * PT - sys.gamma * I;
    M.block(nc, nc + n, n, 1) = sys.forcing();
    return M;
}

}  // namespace

TEST_CASE("zero start with zero forcing stays at zero") {
    auto sys = two_site_system(0.5, 1.0, 0);
    auto sol = first_moment(sys, Eigen::VectorXd::Zero(2), {1.0, 5.0});
    for (const auto& m : sol.m) CHECK(m.cwiseAbs().maxCoeff() == 0.0);
    auto pair = second_moment(sys, Eigen::VectorXd::Zero(2), {1.0});
    CHECK(pair.C.back().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-site steady state with one immortal particle per site") {
    // hand 2x2 oracle: (gamma I - lambda P^T) m = f with f = (1/2, 1/2)
    // gives m = (1, 1), so the occupancy means settle at 2
    auto sys = two_site_system(0.5, 1.0, 1);
    CHECK(sys.stable());
    auto ss = steady_state(sys);
    CHECK(ss.m(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ss.m(1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ss.U1 == doctest::Approx(2.0).epsilon(1e-12));
    // pair fixed point solves 2 gamma C - lambda (P^T C + C P) = F exactly
    Eigen::MatrixXd resid = 2.0 * sys.gamma * ss.C -
                            2.0 * sys.lambda * apply_pair_operator(sys.P, ss.C) -
                            pair_forcing(sys, ss.m);
    CHECK(resid.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(ss.U2 == doctest::Approx(16.0 / 3).epsilon(1e-10));
}

TEST_CASE("zero floor has a zero steady state") {
    auto sys = two_site_system(0.5, 1.0, 0);
    auto ss = steady_state(sys);
    CHECK(ss.m.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(ss.C.cwiseAbs().maxCoeff() < 1e-13);
    CHECK(ss.U1 == 0.0);
}

TEST_CASE("the boundary of the stability condition is refused") {
    auto sys = two_site_system(1.0, 1.0, 1);  // lambda * theta == gamma
    CHECK_FALSE(sys.stable());
    CHECK_THROWS_AS(steady_state(sys), UnstableRegime);
}

TEST_CASE("summed first moments on the torus grow like e^((lambda-1)t)") {
    auto g = build_lattice_torus(1, 16);
    Kernel kernel = build_simple_kernel(g);
    auto sys = make_moment_system(kernel, g->all_vertices(), 2.0, 1.0, 0);
    Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(16);
    xi0(0) = 1.0;
    xi0(5) = 2.0;
    auto sol = first_moment(sys, xi0, {0.5, 1.0, 2.0});
    for (std::size_t i = 0; i < sol.t.size(); ++i) {
        double expected = std::exp((2.0 - 1.0) * sol.t[i]) * 3.0;
        CHECK(sol.m[i].sum() == doctest::Approx(expected).epsilon(1e-8));
    }
}

TEST_CASE("transient solution lands on the steady state") {
    auto sys = two_site_system(0.5, 1.0, 1);
    auto ss = steady_state(sys);
    Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(2);
    xi0(0) = 3.0;  // far from equilibrium
    auto sol = first_moment(sys, xi0, {50.0 / sys.gamma});
    CHECK((sol.m.back() - ss.m).cwiseAbs().maxCoeff() < 1e-8);
    auto pair = second_moment(sys, xi0, {50.0 / sys.gamma});
    CHECK((pair.C.back() - ss.C).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("pair transients match the dense matrix exponential") {
    auto sys = two_site_system(0.5, 1.0, 1);
    Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(2);
    xi0(0) = 1.0;
    auto sol = second_moment(sys, xi0, {5.0});

    Eigen::MatrixXd M = augmented_matrix(sys);
    Eigen::VectorXd z0(7);
    Eigen::MatrixXd C0 = xi0 * xi0.transpose();
    z0 << Eigen::Map<const Eigen::VectorXd>(C0.data(), 4), xi0, 1.0;
    Eigen::VectorXd z = oracles::expm_apply(M, z0, 5.0);
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            CHECK(std::abs(sol.C.back()(x, y) - z(x + 2 * y)) < 1e-6);
        }
        CHECK(std::abs(sol.m.back()(x) - z(4 + x)) < 1e-6);
    }
}

TEST_CASE("pair solutions are symmetric with nonnegative variances") {
    std::mt19937_64 rng(7);
    auto g = build_lattice_torus(1, 6);
    Kernel kernel = build_simple_kernel(g);
    auto sys = make_moment_system(kernel, g->all_vertices(), 0.6, 1.0, 2);
    Eigen::VectorXd xi0(6);
    for (int i = 0; i < 6; ++i) xi0(i) = static_cast<double>(rng() % 4);
    auto sol = second_moment(sys, xi0, {0.5, 2.0, 8.0});
    for (std::size_t i = 0; i < sol.t.size(); ++i) {
        const auto& C = sol.C[i];
        CHECK((C - C.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        for (int x = 0; x < 6; ++x) {
            CHECK(C(x, x) - sol.m[i](x) * sol.m[i](x) >= -1e-8);
        }
    }
}

TEST_CASE("budget guard on the pair system") {
    auto g = build_lattice_torus(1, 8);
    Kernel kernel = build_simple_kernel(g);
    auto sys = make_moment_system(kernel, g->all_vertices(), 0.5, 1.0, 1);
    CHECK_THROWS_AS(second_moment(sys, Eigen::VectorXd::Zero(8), {1.0}, 4), BudgetExceeded);
}

TEST_CASE("explicit solution") {
    SUBCASE("no forcing, flat start, doubly stochastic: u = e^(beta t)") {
        auto g = build_lattice_torus(1, 8);
        Kernel kernel = build_simple_kernel(g);
        auto sys = make_moment_system(kernel, g->all_vertices(), 1.5, 0.0, 0);
        Eigen::VectorXd phi = Eigen::VectorXd::Ones(8);
        Eigen::VectorXd u = explicit_solution(sys.P.transpose(), 1.5, -0.7, phi, nullptr, 2.0);
        for (int x = 0; x < 8; ++x) {
            CHECK(u(x) == doctest::Approx(std::exp(-0.7 * 2.0)).epsilon(1e-10));
        }
    }
    SUBCASE("random 6-vertex instance agrees with the integrator") {
        auto g = build_custom(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}, {0, 3}});
        Kernel kernel = build_simple_kernel(g);
        double lambda = 0.8, gamma = 1.1;
        int k = 2;
        auto sys = make_moment_system(kernel, g->all_vertices(), lambda, gamma, k);
        Eigen::VectorXd xi0(6);
        xi0 << 1, 0, 3, 2, 0, 1;
        double t = 3.0;
        auto sol = first_moment(sys, xi0, {t});
        // the moment system in explicit form: Q = P^T, beta = lambda - gamma,
        // f(s) = constant k lambda colsums
        Eigen::VectorXd f = sys.forcing();
        Eigen::VectorXd u = explicit_solution(
            sys.P.transpose(), lambda, lambda - gamma, xi0,
            [&](double) { return f; }, t);
        CHECK((u - sol.m.back()).cwiseAbs().maxCoeff() < 1e-6);
    }
    SUBCASE("alpha-norm contraction of the Poissonized kernel") {
        auto g = build_tree(2, 5);
        auto weights = make_alpha_weights(g);
        Kernel kernel = build_simple_kernel(g);
        auto sys = make_moment_system(kernel, g->all_vertices(), 1.3, 1.0, 0);
        Eigen::VectorXd alpha(g->vertex_count());
        for (int v = 0; v < g->vertex_count(); ++v) alpha(v) = weights.alpha[v];
        double t = 0.8, lambda = 1.3;
        // row orientation: sum_y q_t(x,y) alpha(y) with q built from P itself
        Eigen::VectorXd lhs = poissonized_apply(sys.P, lambda, t, alpha);
        double bound = std::exp(lambda * t * (weights.M - 1.0));
        for (int v = 0; v < g->vertex_count(); ++v) {
            CHECK(lhs(v) <= bound * alpha(v) + 1e-12);
        }
    }
    SUBCASE("negative time is rejected") {
        auto sys = two_site_system(0.5, 1.0, 0);
        CHECK_THROWS_AS(
            explicit_solution(sys.P, 1.0, 0.0, Eigen::VectorXd::Ones(2), nullptr, -1.0),
            std::invalid_argument);
    }
}

TEST_CASE("pair operator norms stay below the kernel norms") {
    // three kernels with constant column sums, where the bound holds at
    // every power (boundary-broken restrictions genuinely violate it at
    // small n, see the pair-operator notes)
    auto torus1 = build_lattice_torus(1, 12);
    auto torus2 = build_lattice_torus(2, 4);
    auto torus_small = build_lattice_torus(1, 4);
    std::vector<MomentSystem> systems;
    systems.push_back(
        make_moment_system(build_simple_kernel(torus1), torus1->all_vertices(), 1.0, 1.0, 0));
    systems.push_back(
        make_moment_system(build_simple_kernel(torus2), torus2->all_vertices(), 1.0, 1.0, 0));
    systems.push_back(make_moment_system(build_simple_kernel(torus_small),
                                         VertexSet(torus_small->vertex_count(), {0, 1}), 1.0,
                                         1.0, 0));
    for (const auto& sys : systems) {
        int n = sys.dim();
        Eigen::MatrixXd C = Eigen::MatrixXd::Ones(n, n);
        Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
        std::vector<Eigen::VectorXd> w_powers{w};
        for (int step = 1; step <= 30; ++step) {
            C = apply_pair_operator(sys.P, C);
            w = sys.P.transpose() * w;
            w_powers.push_back(w);
            double bn = std::pow(C.maxCoeff(), 1.0 / step);
            double vn = std::pow(w.maxCoeff(), 1.0 / step);
            CHECK(bn <= vn + 1e-9);
            // binomial cross-check of the pair-operator powers:
            // ||B^n||(x,y) = 2^-n sum_k C(n,k) w_k(x) w_{n-k}(y)
            if (step <= 12) {
                double direct = 0.0;
                Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(n, n);
                double binom = 1.0;
                for (int k = 0; k <= step; ++k) {
                    expected += binom * w_powers[static_cast<std::size_t>(k)] *
                                w_powers[static_cast<std::size_t>(step - k)].transpose();
                    binom = binom * (step - k) / (k + 1);
                }
                expected /= std::pow(2.0, step);
                direct = (C - expected).cwiseAbs().maxCoeff();
                CHECK(direct < 1e-12);
            }
        }
    }
}

TEST_CASE("simulated site means track the first-moment solution") {
    auto g = build_custom(2, {{0, 1}});
    Kernel kernel = build_simple_kernel(g);
    auto sys = make_moment_system(kernel, g->all_vertices(), 0.5, 1.0, 1);
    Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(2);
    auto sol = first_moment(sys, xi0, {1.0, 5.0});

    const int replicas = 4000;
    std::vector<double> occ_t1(replicas), occ_t5(replicas);
    run_replicas(replicas, 2, 0xbeef, [&](int r, std::uint64_t stream) {
        SimParams p;
        p.gamma = 1.0;
        p.immortal_floor = 1;
        p.region = VertexSet::all(2);
        p.profile = RateProfile::constant(0.5);
        p.t_end = 5.0;
        p.seed = stream;
        p.sample_times = {1.0, 5.0};
        Trajectory traj = run_sim(kernel, p, Configuration::uniform(2, 1));
        occ_t1[static_cast<std::size_t>(r)] = 0.5 * (traj.samples[0](0) + traj.samples[0](1));
        occ_t5[static_cast<std::size_t>(r)] = 0.5 * (traj.samples[1](0) + traj.samples[1](1));
    });
    auto m1 = mean_se(occ_t1);
    auto m5 = mean_se(occ_t5);
    CHECK(std::abs(m1.mean - (sol.m[0].mean() + 1.0)) <= 3.0 * m1.se);
    CHECK(std::abs(m5.mean - (sol.m[1].mean() + 1.0)) <= 3.0 * m5.se);
}
