#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rbrw/experiments.hpp"
#include "rbrw/invariant.hpp"

using namespace rbrw;

namespace {

ReplicaSummaries synthetic(int replicas, double growth, bool extinct, bool occupied) {
    ReplicaSummaries s;
    for (int i = 1; i <= 20; ++i) s.sample_times.push_back(i * 0.5);
    for (int r = 0; r < replicas; ++r) {
        std::vector<double> series;
        for (double t : s.sample_times) {
            series.push_back(extinct ? 0.0 : std::exp(growth * t));
        }
        s.total_mass.push_back(series);
        s.extinct.push_back(extinct ? 1 : 0);
        s.site_occupied_at_end.push_back(occupied ? 1 : 0);
    }
    return s;
}

}  // namespace

TEST_CASE("classifier on synthetic evidence") {
    ClassifierThresholds th;
    SUBCASE("all replicas extinct") {
        auto cls = classify_run(synthetic(100, 0.0, true, false), th);
        CHECK(cls.flags.extinct);
        CHECK_FALSE(cls.flags.exploding_mean);
        CHECK(cls.evidence.extinct_fraction == 1.0);
    }
    SUBCASE("unit growth rate reads as exploding") {
        auto cls = classify_run(synthetic(100, 1.0, false, true), th);
        CHECK(cls.flags.exploding_mean);
        CHECK(cls.evidence.slope == doctest::Approx(1.0).epsilon(1e-9));
        CHECK_FALSE(cls.flags.extinct);
        CHECK_FALSE(cls.flags.bounded_mean);
    }
    SUBCASE("flat series reads as bounded and surviving") {
        auto cls = classify_run(synthetic(100, 0.0, false, true), th);
        CHECK(cls.flags.bounded_mean);
        CHECK(cls.flags.surviving);
        CHECK_FALSE(cls.flags.exploding_mean);
    }
    SUBCASE("determinism") {
        auto a = classify_run(synthetic(60, 0.3, false, true), th);
        auto b = classify_run(synthetic(60, 0.3, false, true), th);
        CHECK(a.evidence.slope == b.evidence.slope);
        CHECK(a.flags.exploding_mean == b.flags.exploding_mean);
    }
    SUBCASE("insufficient replicas are rejected") {
        CHECK_THROWS_AS(classify_run(synthetic(30, 1.0, false, false), th),
                        std::invalid_argument);
    }
}

TEST_CASE("canonical regimes at reduced scale") {
    auto g = build_lattice_torus(1, 30);
    Kernel kernel = build_simple_kernel(g);
    auto scenarios = canonical_scenarios();
    REQUIRE(scenarios.size() == 4);
    // shrink for the unit test; the acceptance suite runs the full sizes
    scenarios[0].replicas = 100;
    scenarios[0].t_end = 40.0;
    scenarios[1].replicas = 100;
    scenarios[1].t_end = 30.0;
    scenarios[2].replicas = 2000;
    scenarios[3].replicas = 80;
    scenarios[3].t_end = 20.0;

    auto reports = regime_suite(kernel, scenarios, 20240817, 2);
    REQUIRE(reports.size() == 4);
    for (const auto& rep : reports) {
        INFO(rep.scenario, " slope=", rep.evidence.slope,
             " extinct=", rep.evidence.extinct_fraction,
             " occupied=", rep.evidence.site_occupied_fraction);
        CHECK(rep.matches_target);
        CHECK(to_string(rep.label) == to_string(rep.target));
    }
    CHECK(reports[0].evidence.extinct_fraction >= 0.95);
    CHECK(std::abs(reports[2].evidence.slope - 1.0) < 0.05);
    CHECK(reports[2].rho_hat == doctest::Approx(1.0).epsilon(0.05));
    // the bounded scenario has to respect the immortal-particle moment bound
    Kernel full = build_simple_kernel(g);
    CHECK(reports[3].evidence.late_window_mean / g->vertex_count() <= 6.0);
}

TEST_CASE("contact-process pilot survives, justifying the surviving scenario") {
    // the n=1 truncation of the steep profile is the contact process with
    // rate c(0) = 8; its survival in this pinned pilot run is what licenses
    // the surviving label for the full profile (domination)
    auto g = build_lattice_torus(1, 30);
    Kernel kernel = build_simple_kernel(g);
    RateProfile cp = RateProfile::step(8.0, 3, 0.5).truncated(1);
    Scenario pilot;
    pilot.name = "cp-pilot";
    pilot.target = RegimeLabel::Surviving;
    pilot.profile = cp;
    pilot.start = Scenario::Start::Delta;
    pilot.t_end = 30.0;
    pilot.replicas = 100;
    auto summaries = run_scenario(kernel, pilot, 777, 2);
    auto cls = classify_run(summaries, ClassifierThresholds{});
    CHECK(cls.flags.surviving);
    CHECK(cls.evidence.site_occupied_fraction >= 0.20);
}

TEST_CASE("volume ladder") {
    auto g = build_lattice_torus(1, 64);
    Kernel kernel = build_simple_kernel(g);
    Scenario scenario;
    scenario.profile = RateProfile::constant(0.5);
    scenario.start = Scenario::Start::Delta;
    scenario.t_end = 5.0;
    scenario.replicas = 20000;

    SUBCASE("needs at least three levels") {
        CHECK_THROWS_AS(volume_convergence(kernel, {2, 4}, scenario, 1, 2),
                        std::invalid_argument);
        CHECK_THROWS_AS(volume_convergence(kernel, {4, 4, 8}, scenario, 1, 2),
                        std::invalid_argument);
    }
    SUBCASE("local statistic stabilizes as the region grows") {
        auto report = volume_convergence(kernel, {2, 4, 8, 16, 24}, scenario, 4242, 2);
        REQUIRE(report.levels.size() == 5);
        CHECK(report.last_two_agree);
        CHECK_FALSE(report.systematic_drift);
        // differences shrink from the coarse levels to the fine ones
        CHECK(report.successive_diff.front() >= report.successive_diff.back());
        auto text = report.summary();
        CHECK(text.find("largest two agree") != std::string::npos);
    }
    SUBCASE("small horizons decouple from the region beyond radius 2") {
        Scenario quick = scenario;
        quick.t_end = 0.02;
        quick.replicas = 100;
        quick.profile = RateProfile::constant(2.0);
        auto report = volume_convergence(kernel, {2, 3, 4}, quick, 99, 2);
        // shared seeds and no excursion past radius 1: identical statistics
        CHECK(report.levels[0].stat == report.levels[1].stat);
        CHECK(report.levels[1].stat == report.levels[2].stat);
    }
}
