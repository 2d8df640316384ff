#include <benchmark/benchmark.h>

#include "rbrw/coupling.hpp"
#include "rbrw/moments.hpp"
#include "rbrw/simulate.hpp"
#include "rbrw/spectral.hpp"

using namespace rbrw;

namespace {

void BM_SimEvents(benchmark::State& state) {
    auto g = build_lattice_torus(1, static_cast<int>(state.range(0)));
    Kernel kernel = build_simple_kernel(g);
    SimParams params;
    params.gamma = 1.0;
    params.immortal_floor = 1;
    params.region = g->all_vertices();
    params.profile = RateProfile::step(4.0, 3, 0.5);
    params.t_end = 50.0 / state.range(0);  // roughly constant event count per size
    Configuration eta0 = Configuration::uniform(g->vertex_count(), 2);
    std::uint64_t seed = 1;
    std::uint64_t events = 0;
    for (auto _ : state) {
        params.seed = seed++;
        Trajectory traj = run_sim(kernel, params, eta0);
        benchmark::DoNotOptimize(traj.event_count);
        events += traj.event_count;
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(events));
}

void BM_CoupledEvents(benchmark::State& state) {
    auto g = build_lattice_torus(1, 50);
    Kernel kernel = build_simple_kernel(g);
    CouplingSpec spec;
    for (int h = 0; h < 3; ++h) {
        CouplingComponent c;
        c.region = g->all_vertices();
        c.immortal_floor = h;
        c.gamma = 1.0;
        c.profile = RateProfile::step(2.0, 2, 0.5);
        c.eta0 = Configuration::uniform(g->vertex_count(), h);
        spec.components.push_back(std::move(c));
    }
    std::uint64_t seed = 1;
    std::uint64_t events = 0;
    for (auto _ : state) {
        auto result = run_coupled(kernel, spec, 1e18, seed++, {}, 20000);
        benchmark::DoNotOptimize(result.certificate.events);
        events += result.certificate.events;
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(events));
}

void BM_ThetaRadial(benchmark::State& state) {
    auto g = build_tree(2, 2);
    Kernel kernel = build_biased_tree_kernel(g, 0.45);
    for (auto _ : state) {
        auto est = theta_estimate(kernel, static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(est.value);
    }
}

void BM_ThetaMatrix(benchmark::State& state) {
    auto g = build_lattice_torus(2, static_cast<int>(state.range(0)));
    Kernel kernel = build_simple_kernel(g);
    for (auto _ : state) {
        auto est = theta_estimate(kernel, 30);
        benchmark::DoNotOptimize(est.value);
    }
}

void BM_PairMoments(benchmark::State& state) {
    auto g = build_lattice_torus(1, static_cast<int>(state.range(0)));
    Kernel kernel = build_simple_kernel(g);
    auto sys = make_moment_system(kernel, g->all_vertices(), 0.5, 1.0, 1);
    Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(sys.dim());
    for (auto _ : state) {
        auto sol = second_moment(sys, xi0, {1.0});
        benchmark::DoNotOptimize(sol.C.back()(0, 0));
    }
}

}  // namespace

BENCHMARK(BM_SimEvents)->Arg(50)->Arg(200)->Arg(1000);
BENCHMARK(BM_CoupledEvents);
BENCHMARK(BM_ThetaRadial)->Arg(40)->Arg(200);
BENCHMARK(BM_ThetaMatrix)->Arg(8)->Arg(16);
BENCHMARK(BM_PairMoments)->Arg(16)->Arg(48);

BENCHMARK_MAIN();
