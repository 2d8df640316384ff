#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rbrw/invariant.hpp"

using namespace rbrw;

namespace {

Kernel torus_kernel(int L) { return build_simple_kernel(build_lattice_torus(1, L)); }

}  // namespace

TEST_CASE("level 1 reduces to the contact process") {
    Kernel k = torus_kernel(30);
    auto est = estimate_mu_n(1, k, RateProfile::step(4.0, 3, 0.5), 10.0, 30.0, 4, 12345, 2);
    CHECK(est.max_occupancy_seen <= 1);
    CHECK(est.pooled_hist.size() == 2);
    CHECK(est.pooled_mean > 0.0);  // supercritical: positive density
    CHECK(est.pooled_mean < 1.0);
}

TEST_CASE("occupancies never exceed the truncation level") {
    Kernel k = torus_kernel(20);
    for (int n : {2, 4}) {
        auto est = estimate_mu_n(n, k, RateProfile::step(6.0, 3, 0.5), 5.0, 15.0, 3, 99, 2);
        CHECK(est.max_occupancy_seen <= n);
        double mass = 0.0;
        for (double p : est.pooled_hist) mass += p;
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("estimates are deterministic in the master seed") {
    Kernel k = torus_kernel(16);
    auto a = estimate_mu_n(3, k, RateProfile::step(6.0, 3, 0.5), 4.0, 10.0, 3, 7, 1);
    auto b = estimate_mu_n(3, k, RateProfile::step(6.0, 3, 0.5), 4.0, 10.0, 3, 7, 2);
    CHECK(a.pooled_mean == b.pooled_mean);  // jobs must not matter
    for (int v = 0; v < 16; ++v) CHECK(a.site_mean[v] == b.site_mean[v]);
}

TEST_CASE("invalid inputs") {
    Kernel k = torus_kernel(10);
    auto profile = RateProfile::constant(2.0);
    CHECK_THROWS_AS(estimate_mu_n(0, k, profile, 1.0, 1.0, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_mu_n(2, k, profile, 1.0, 0.0, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_mu_n(2, k, profile, 1.0, 1.0, 0, 1), std::invalid_argument);
}

TEST_CASE("sequence diagnostics on a small ladder") {
    Kernel k = torus_kernel(40);
    RateProfile profile = RateProfile::step(8.0, 3, 0.5);
    std::vector<MuEstimate> ladder;
    ladder.push_back(estimate_mu_n(2, k, profile, 15.0, 40.0, 6, 2024, 2));
    ladder.push_back(estimate_mu_n(5, k, profile, 25.0, 40.0, 6, 2025, 2));
    auto diag = mu_sequence_diagnostics(ladder, k, profile, {5, 10, 20});
    // theta = 1 on the torus, c(3) = 0.5 < 1, so k_bar = 3 and
    // U1 = k_bar / (1 - c(k_bar)) = 6
    CHECK(diag.theta_hat == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(diag.k_bar == 3);
    CHECK(diag.u1 == doctest::Approx(6.0).epsilon(1e-6));
    for (const auto& check : diag.checks) {
        INFO(check.name, ": ", check.detail);
        if (check.applicable) CHECK(check.pass);
    }
    CHECK(diag.all_pass());
    auto text = diag.report();
    CHECK(text.find("[pass]") != std::string::npos);
    CHECK(text.find("Chebyshev") != std::string::npos);
}

TEST_CASE("diagnostics report an unavailable bound for unrestrained profiles") {
    Kernel k = torus_kernel(12);
    RateProfile profile = RateProfile::constant(2.0);
    std::vector<MuEstimate> ladder;
    ladder.push_back(estimate_mu_n(2, k, profile, 2.0, 6.0, 3, 5, 2));
    ladder.push_back(estimate_mu_n(3, k, profile, 2.0, 6.0, 3, 6, 2));
    auto diag = mu_sequence_diagnostics(ladder, k, profile);
    CHECK(diag.k_bar == -1);
    bool found = false;
    for (const auto& c : diag.checks) {
        if (c.name.find("tightness") != std::string::npos) {
            found = true;
            CHECK_FALSE(c.applicable);
        }
    }
    CHECK(found);
}

TEST_CASE("identical estimates are trivially monotone") {
    Kernel k = torus_kernel(16);
    RateProfile profile = RateProfile::step(6.0, 2, 0.5);
    auto est = estimate_mu_n(3, k, profile, 5.0, 12.0, 4, 11, 2);
    auto diag = mu_sequence_diagnostics({est, est}, k, profile);
    for (const auto& c : diag.checks) {
        if (c.name.find("nondecreasing") != std::string::npos) CHECK(c.pass);
        if (c.name.find("CDF") != std::string::npos) CHECK(c.pass);
    }
}

TEST_CASE("mismatched ladders are rejected") {
    Kernel k16 = torus_kernel(16);
    Kernel k12 = torus_kernel(12);
    RateProfile profile = RateProfile::step(6.0, 2, 0.5);
    auto a = estimate_mu_n(2, k16, profile, 2.0, 5.0, 2, 1, 1);
    auto b = estimate_mu_n(3, k12, profile, 2.0, 5.0, 2, 1, 1);
    CHECK_THROWS_AS(mu_sequence_diagnostics({a, b}, k16, profile), std::invalid_argument);
    CHECK_THROWS_AS(mu_sequence_diagnostics({a}, k16, profile), std::invalid_argument);
}
