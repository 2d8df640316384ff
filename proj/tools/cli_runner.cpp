#include "cli_runner.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <vector>

#include "rbrw/coupling.hpp"
#include "rbrw/csv.hpp"
#include "rbrw/experiments.hpp"
#include "rbrw/invariant.hpp"
#include "rbrw/moments.hpp"
#include "rbrw/replicas.hpp"
#include "rbrw/simulate.hpp"
#include "rbrw/spectral.hpp"

#ifndef RBRW_VERSION
#define RBRW_VERSION "0.0.0"
#endif

namespace rbrw::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Config problems found after a successful parse map to exit code 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(const std::string& message) { throw ConfigError(message); }

const json& need(const json& node, const char* key, const char* context) {
    auto it = node.find(key);
    if (it == node.end()) fail(std::string(context) + ": missing required field '" + key + "'");
    return *it;
}

double need_number(const json& node, const char* key, const char* context) {
    const json& v = need(node, key, context);
    if (!v.is_number()) fail(std::string(context) + ": field '" + key + "' must be a number");
    return v.get<double>();
}

int need_int(const json& node, const char* key, const char* context) {
    const json& v = need(node, key, context);
    if (!v.is_number_integer()) fail(std::string(context) + ": field '" + key + "' must be an integer");
    return v.get<int>();
}

std::string need_string(const json& node, const char* key, const char* context) {
    const json& v = need(node, key, context);
    if (!v.is_string()) fail(std::string(context) + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

GraphPtr parse_graph(const json& spec) {
    std::string family = need_string(spec, "family", "graph");
    if (family == "lattice-torus") {
        return build_lattice_torus(need_int(spec, "d", "graph"), need_int(spec, "L", "graph"));
    }
    if (family == "lattice-box") {
        return build_lattice_box(need_int(spec, "d", "graph"), need_int(spec, "L", "graph"));
    }
    if (family == "tree") {
        return build_tree(need_int(spec, "n", "graph"), need_int(spec, "depth", "graph"));
    }
    if (family == "custom") {
        const json& edges = need(spec, "edges", "graph");
        std::vector<std::pair<int, int>> list;
        for (const auto& e : edges) list.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        int vertices = need_int(spec, "vertices", "graph");
        int root = spec.value("root", 0);
        return build_custom(vertices, list, root);
    }
    fail("graph: unknown family '" + family + "'");
}

Kernel parse_kernel(const json& spec, const GraphPtr& graph) {
    std::string kind = need_string(spec, "kind", "kernel");
    if (kind == "simple") return build_simple_kernel(graph);
    if (kind == "biased-tree") {
        return build_biased_tree_kernel(graph, need_number(spec, "p", "kernel"));
    }
    fail("kernel: unknown kind '" + kind + "'");
}

RateProfile parse_profile(const json& spec) {
    std::string kind = need_string(spec, "kind", "profile");
    RateProfile profile;
    if (kind == "constant") {
        profile = RateProfile::constant(need_number(spec, "lambda", "profile"));
    } else if (kind == "cp") {
        profile = RateProfile::contact_process(need_number(spec, "lambda", "profile"));
    } else if (kind == "step") {
        profile = RateProfile::step(need_number(spec, "lambda", "profile"),
                                    need_int(spec, "threshold", "profile"),
                                    need_number(spec, "low", "profile"));
    } else if (kind == "table") {
        const json& table = need(spec, "table", "profile");
        std::vector<double> values;
        for (const auto& v : table) values.push_back(v.get<double>());
        profile = RateProfile::from_table(values, need_number(spec, "tail", "profile"));
    } else {
        fail("profile: unknown kind '" + kind + "'");
    }
    if (spec.contains("truncate")) profile = profile.truncated(spec["truncate"].get<int>());
    return profile;
}

VertexSet parse_region(const json& parent, const GraphPtr& graph) {
    if (!parent.contains("region")) return graph->all_vertices();
    const json& spec = parent["region"];
    std::string kind = need_string(spec, "kind", "region");
    if (kind == "all") return graph->all_vertices();
    if (kind == "ball") {
        return graph->ball(graph->root, need_int(spec, "radius", "region"));
    }
    if (kind == "vertices") {
        std::vector<int> ids;
        for (const auto& v : need(spec, "ids", "region")) ids.push_back(v.get<int>());
        return VertexSet(graph->vertex_count(), ids);
    }
    fail("region: unknown kind '" + kind + "'");
}

Configuration parse_initial(const json& spec, const GraphPtr& graph, const char* context) {
    std::string kind = need_string(spec, "kind", context);
    int V = graph->vertex_count();
    if (kind == "zeros") return Configuration::zeros(V);
    if (kind == "delta") {
        int v = spec.value("vertex", graph->root);
        return Configuration::delta(V, v);
    }
    if (kind == "constant") {
        return Configuration::uniform(V, need_int(spec, "level", context));
    }
    if (kind == "table") {
        Configuration c(V);
        const json& occ = need(spec, "occupancies", context);
        if (static_cast<int>(occ.size()) != V) fail(std::string(context) + ": occupancy table size mismatch");
        for (int v = 0; v < V; ++v) c.add(v, occ[static_cast<std::size_t>(v)].get<int>());
        return c;
    }
    fail(std::string(context) + ": unknown initial kind '" + kind + "'");
}

std::vector<double> parse_sample_times(const json& spec, const char* context) {
    if (spec.is_array()) {
        std::vector<double> times;
        for (const auto& v : spec) times.push_back(v.get<double>());
        return times;
    }
    if (spec.is_object()) {
        int count = need_int(spec, "count", context);
        double until = need_number(spec, "until", context);
        if (count < 1) fail(std::string(context) + ": sample count must be >= 1");
        std::vector<double> times;
        for (int i = 1; i <= count; ++i) times.push_back(until * i / count);
        return times;
    }
    fail(std::string(context) + ": sample_times must be an array or {count, until}");
}

// FNV-1a over the canonical (sorted-key) serialization.
std::string config_hash(const json& config) {
    std::string text = config.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

struct OutputSink {
    fs::path dir;
    std::vector<std::string> files;

    std::ofstream open(const std::string& name) {
        fs::create_directories(dir);
        files.push_back(name);
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open output file " + (dir / name).string());
        return out;
    }
};

struct Context {
    json config;
    GraphPtr graph;
    Kernel kernel;
    std::uint64_t seed = 0;
    int jobs = 1;
    OutputSink sink;
};

void write_trajectory_rows(CsvWriter& csv, const std::vector<double>& times,
                           const std::vector<double>& values, const std::string& statistic,
                           int replica, std::uint64_t seed) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        csv.field(times[i]).field(statistic).field(values[i]).field(replica);
        csv.field(static_cast<unsigned long long>(seed));
        csv.endrow();
    }
}

int run_simulate(Context& ctx) {
    const json& spec = need(ctx.config, "simulate", "config");
    SimParams params;
    params.gamma = need_number(spec, "gamma", "simulate");
    params.immortal_floor = need_int(spec, "k", "simulate");
    params.profile = parse_profile(need(spec, "profile", "simulate"));
    params.t_end = need_number(spec, "t_end", "simulate");
    params.region = parse_region(spec, ctx.graph);
    params.sample_times = parse_sample_times(need(spec, "sample_times", "simulate"), "simulate");
    Configuration eta0 = parse_initial(need(spec, "initial", "simulate"), ctx.graph, "simulate");

    int replicas = ctx.config.value("replicas", 1);
    if (replicas < 1) fail("config: replicas must be >= 1");
    std::vector<std::string> stats = {"total-mass"};
    if (spec.contains("statistics")) {
        stats.clear();
        for (const auto& s : spec["statistics"]) stats.push_back(s.get<std::string>());
    }
    bool want_histogram = false;
    std::vector<Statistic> parsed;
    for (const auto& s : stats) {
        Statistic st = statistic_from_string(s);
        if (st == Statistic::OccupancyHistogram) {
            // pooled over sites and replicas at the final sample time,
            // emitted as its own file
            want_histogram = true;
        } else {
            parsed.push_back(st);
        }
    }
    stats.erase(std::remove(stats.begin(), stats.end(), std::string("occupancy-histogram")),
                stats.end());

    struct Row {
        std::uint64_t seed;
        std::vector<std::vector<double>> series;
        std::vector<long long> final_histogram;
    };
    std::vector<Row> rows(static_cast<std::size_t>(replicas));
    run_replicas(replicas, ctx.jobs, ctx.seed, [&](int r, std::uint64_t stream) {
        SimParams p = params;
        p.seed = stream;
        Trajectory traj = run_sim(ctx.kernel, p, eta0);
        Row row;
        row.seed = stream;
        for (Statistic s : parsed) row.series.push_back(summarize(traj, s, p.region));
        if (want_histogram && !traj.samples.empty()) {
            row.final_histogram = occupancy_histogram(
                traj, static_cast<int>(traj.samples.size()) - 1, p.region);
        }
        rows[static_cast<std::size_t>(r)] = std::move(row);
    });

    auto out = ctx.sink.open("trajectory.csv");
    CsvWriter csv(out);
    csv.header("time,statistic,value,replica,seed");
    for (int r = 0; r < replicas; ++r) {
        for (std::size_t s = 0; s < parsed.size(); ++s) {
            write_trajectory_rows(csv, params.sample_times,
                                  rows[static_cast<std::size_t>(r)].series[s], stats[s], r,
                                  rows[static_cast<std::size_t>(r)].seed);
        }
    }

    if (want_histogram) {
        std::vector<long long> pooled;
        for (const auto& row : rows) {
            if (row.final_histogram.size() > pooled.size()) {
                pooled.resize(row.final_histogram.size(), 0);
            }
            for (std::size_t j = 0; j < row.final_histogram.size(); ++j) {
                pooled[j] += row.final_histogram[j];
            }
        }
        auto hout = ctx.sink.open("occupancy_histogram.csv");
        CsvWriter hcsv(hout);
        hcsv.header("time,occupancy,count");
        for (std::size_t j = 0; j < pooled.size(); ++j) {
            hcsv.field(params.sample_times.back()).field(static_cast<int>(j)).field(pooled[j]);
            hcsv.endrow();
        }
    }

    if (spec.value("event_log", false)) {
        auto log = ctx.sink.open("events.jsonl");
        SimParams p = params;
        p.seed = replica_seed(ctx.seed, 0);
        auto observer = [&](const Event& ev, const Configuration&) {
            json line = {{"time", ev.time},
                         {"site", ev.site},
                         {"kind", ev.kind == EventKind::Death ? "death" : "birth"},
                         {"target", ev.target},
                         {"accepted", ev.accepted}};
            log << line.dump() << '\n';
        };
        run_sim(ctx.kernel, p, eta0, observer);
    }
    return kOk;
}

int run_couple(Context& ctx) {
    const json& spec = need(ctx.config, "couple", "config");
    CouplingSpec coupling;
    for (const auto& comp : need(spec, "components", "couple")) {
        CouplingComponent c;
        c.immortal_floor = need_int(comp, "k", "couple component");
        c.gamma = need_number(comp, "gamma", "couple component");
        c.profile = parse_profile(need(comp, "profile", "couple component"));
        c.region = parse_region(comp, ctx.graph);
        c.eta0 = parse_initial(need(comp, "initial", "couple component"), ctx.graph,
                               "couple component");
        coupling.components.push_back(std::move(c));
    }
    auto violations = validate_spec(coupling);
    if (!violations.empty()) fail("couple: invalid spec: " + violations.front());

    double t_end = need_number(spec, "t_end", "couple");
    std::uint64_t max_events = spec.value("max_events", 0ULL);
    std::vector<double> sample_times;
    if (spec.contains("sample_times")) {
        sample_times = parse_sample_times(spec["sample_times"], "couple");
    }
    int replicas = ctx.config.value("replicas", 1);

    struct Row {
        std::uint64_t seed;
        OrderingCertificate certificate;
        std::vector<std::vector<double>> site_mean;  // [component][time]
    };
    std::vector<Row> rows(static_cast<std::size_t>(replicas));
    run_replicas(replicas, ctx.jobs, ctx.seed, [&](int r, std::uint64_t stream) {
        auto result = run_coupled(ctx.kernel, coupling, t_end, stream, sample_times, max_events);
        Row row;
        row.seed = stream;
        row.certificate = result.certificate;
        for (std::size_t h = 0; h < result.trajectories.size(); ++h) {
            row.site_mean.push_back(summarize(result.trajectories[h], Statistic::SiteMean,
                                              coupling.components[h].region));
        }
        rows[static_cast<std::size_t>(r)] = std::move(row);
    });

    std::uint64_t total_events = 0, total_violations = 0;
    for (const auto& row : rows) {
        total_events += row.certificate.events;
        total_violations += row.certificate.violations;
    }
    auto cert = ctx.sink.open("certificate.txt");
    cert << "coupled components=" << coupling.components.size() << " replicas=" << replicas
         << " events=" << total_events << " ordering-violations=" << total_violations << '\n';
    for (int r = 0; r < replicas; ++r) {
        const auto& c = rows[static_cast<std::size_t>(r)].certificate;
        if (c.violations > 0 && c.first_violation) {
            cert << "replica " << r << ": " << c.summary() << '\n';
        }
    }

    if (!sample_times.empty()) {
        auto out = ctx.sink.open("coupled.csv");
        CsvWriter csv(out);
        csv.header("time,component,statistic,value,replica,seed");
        for (int r = 0; r < replicas; ++r) {
            const auto& row = rows[static_cast<std::size_t>(r)];
            for (std::size_t h = 0; h < row.site_mean.size(); ++h) {
                for (std::size_t i = 0; i < sample_times.size(); ++i) {
                    csv.field(sample_times[i]).field(static_cast<int>(h + 1));
                    csv.field("site-mean").field(row.site_mean[h][i]).field(r);
                    csv.field(static_cast<unsigned long long>(row.seed));
                    csv.endrow();
                }
            }
        }
    }
    return total_violations == 0 ? kOk : kRuntimeError;
}

int run_moments(Context& ctx) {
    const json& spec = need(ctx.config, "moments", "config");
    double lambda = need_number(spec, "lambda", "moments");
    double gamma = need_number(spec, "gamma", "moments");
    int k = need_int(spec, "k", "moments");
    VertexSet region = parse_region(spec, ctx.graph);
    auto system = make_moment_system(ctx.kernel, region, lambda, gamma, k);

    Eigen::VectorXd xi0 = Eigen::VectorXd::Zero(system.dim());
    if (spec.contains("initial")) {
        Configuration c = parse_initial(spec["initial"], ctx.graph, "moments");
        for (int i = 0; i < system.dim(); ++i) {
            xi0(i) = c(system.sites[static_cast<std::size_t>(i)]);
        }
    }
    std::vector<double> t_grid;
    for (const auto& t : need(spec, "t_grid", "moments")) t_grid.push_back(t.get<double>());

    if (spec.value("second_moment", false)) {
        auto sol = second_moment(system, xi0, t_grid);
        auto out1 = ctx.sink.open("first_moment.csv");
        CsvWriter m_csv(out1);
        m_csv.header("t,x,m");
        auto out2 = ctx.sink.open("second_moment.csv");
        CsvWriter c_csv(out2);
        c_csv.header("t,x,y,C");
        for (std::size_t i = 0; i < sol.t.size(); ++i) {
            for (int x = 0; x < system.dim(); ++x) {
                m_csv.field(sol.t[i]).field(system.sites[static_cast<std::size_t>(x)]);
                m_csv.field(sol.m[i](x));
                m_csv.endrow();
                for (int y = 0; y < system.dim(); ++y) {
                    c_csv.field(sol.t[i]).field(system.sites[static_cast<std::size_t>(x)]);
                    c_csv.field(system.sites[static_cast<std::size_t>(y)]).field(sol.C[i](x, y));
                    c_csv.endrow();
                }
            }
        }
    } else {
        auto sol = first_moment(system, xi0, t_grid);
        auto out1 = ctx.sink.open("first_moment.csv");
        CsvWriter m_csv(out1);
        m_csv.header("t,x,m");
        for (std::size_t i = 0; i < sol.t.size(); ++i) {
            for (int x = 0; x < system.dim(); ++x) {
                m_csv.field(sol.t[i]).field(system.sites[static_cast<std::size_t>(x)]);
                m_csv.field(sol.m[i](x));
                m_csv.endrow();
            }
        }
    }

    if (spec.value("steady_state", false)) {
        auto ss = steady_state(system);
        auto out = ctx.sink.open("steady_state.csv");
        CsvWriter csv(out);
        csv.header("x,m_inf,C_diag,eta_mean,eta_second_moment");
        for (int x = 0; x < system.dim(); ++x) {
            csv.field(system.sites[static_cast<std::size_t>(x)]).field(ss.m(x));
            csv.field(ss.C(x, x)).field(ss.m(x) + k);
            csv.field(ss.C(x, x) + 2.0 * k * ss.m(x) + static_cast<double>(k) * k);
            csv.endrow();
        }
        auto rep = ctx.sink.open("moments_report.txt");
        rep << "stable=" << (system.stable() ? "yes" : "no") << " theta_hat=" << system.theta_hat
            << " U1=" << ss.U1 << " U2=" << ss.U2 << " condition=" << ss.condition << '\n';
    }
    return kOk;
}

void write_spectral_csv(OutputSink& sink, const std::string& name, const SpectralEstimate& est) {
    auto out = sink.open(name);
    CsvWriter csv(out);
    csv.header("n,value,root_estimate,ratio_estimate");
    for (std::size_t i = 0; i < est.values.size(); ++i) {
        csv.field(est.steps[i]).field(est.values[i]).field(est.root_estimates[i]);
        csv.field(est.ratio_estimates[i]);
        csv.endrow();
    }
}

int run_spectral(Context& ctx) {
    const json& spec = need(ctx.config, "spectral", "config");
    int n_max = need_int(spec, "n_max", "spectral");
    std::string estimator = spec.value("estimator", "both");
    if (estimator != "theta" && estimator != "rho" && estimator != "both") {
        fail("spectral: estimator must be theta, rho or both");
    }
    if (estimator != "rho") {
        write_spectral_csv(ctx.sink, "spectral_theta.csv", theta_estimate(ctx.kernel, n_max));
    }
    if (estimator != "theta") {
        int vertex = spec.value("vertex", ctx.graph->root);
        int even_n = n_max % 2 == 0 ? n_max : n_max + 1;
        write_spectral_csv(ctx.sink, "spectral_rho.csv",
                           rho_estimate(ctx.kernel, vertex, even_n));
    }
    if (spec.value("closed_forms", false)) {
        if (!ctx.kernel.tree) fail("spectral: closed_forms requires a tree kernel");
        auto cf = tree_closed_forms(ctx.kernel.tree->branching, ctx.kernel.tree->p);
        auto out = ctx.sink.open("closed_forms.csv");
        CsvWriter csv(out);
        csv.header("rho,theta_lo,theta_hi,theta_exact");
        csv.field(cf.rho).field(cf.theta_lo).field(cf.theta_hi).field(cf.theta_exact ? 1 : 0);
        csv.endrow();
    }
    return kOk;
}

int run_invariant(Context& ctx) {
    const json& spec = need(ctx.config, "invariant", "config");
    RateProfile profile = parse_profile(need(spec, "profile", "invariant"));
    double t_burn_base = need_number(spec, "t_burn", "invariant");
    double t_sample = need_number(spec, "t_sample", "invariant");
    int replicas = need_int(spec, "replicas", "invariant");
    std::vector<int> levels;
    for (const auto& n : need(spec, "levels", "invariant")) levels.push_back(n.get<int>());
    std::vector<double> r_grid = {5, 10, 20};
    if (spec.contains("r_grid")) {
        r_grid.clear();
        for (const auto& r : spec["r_grid"]) r_grid.push_back(r.get<double>());
    }

    std::vector<MuEstimate> estimates;
    std::uint64_t level_tag = 0;
    for (int n : levels) {
        double t_burn = spec.value("scale_burn_with_n", true)
                            ? std::max(t_burn_base, 10.0 * n)
                            : t_burn_base;
        estimates.push_back(estimate_mu_n(n, ctx.kernel, profile, t_burn, t_sample, replicas,
                                          splitmix64(ctx.seed ^ ++level_tag), ctx.jobs));
        const MuEstimate& est = estimates.back();
        auto out = ctx.sink.open("mu_hist_n" + std::to_string(n) + ".csv");
        CsvWriter csv(out);
        csv.header("site,occupancy,frequency");
        for (int v = 0; v < ctx.graph->vertex_count(); ++v) {
            for (std::size_t j = 0; j < est.site_hist[static_cast<std::size_t>(v)].size(); ++j) {
                csv.field(v).field(static_cast<int>(j));
                csv.field(est.site_hist[static_cast<std::size_t>(v)][j]);
                csv.endrow();
            }
        }
    }
    auto report = ctx.sink.open("invariant_report.txt");
    if (estimates.size() >= 2) {
        auto diag = mu_sequence_diagnostics(estimates, ctx.kernel, profile, r_grid);
        report << diag.report();
        return diag.all_pass() ? kOk : kRuntimeError;
    }
    report << "single level: monotonicity diagnostics skipped\n";
    return kOk;
}

Scenario parse_scenario(const json& spec) {
    Scenario s;
    s.name = need_string(spec, "name", "scenario");
    std::string target = need_string(spec, "target", "scenario");
    if (target == "extinct") s.target = RegimeLabel::Extinct;
    else if (target == "surviving") s.target = RegimeLabel::Surviving;
    else if (target == "exploding-mean") s.target = RegimeLabel::ExplodingMean;
    else if (target == "bounded-mean") s.target = RegimeLabel::BoundedMean;
    else fail("scenario: unknown target '" + target + "'");
    s.profile = parse_profile(need(spec, "profile", "scenario"));
    s.gamma = spec.value("gamma", 1.0);
    s.immortal_floor = spec.value("k", 0);
    std::string start = spec.value("start", "delta");
    if (start == "delta") s.start = Scenario::Start::Delta;
    else if (start == "ones") s.start = Scenario::Start::Ones;
    else fail("scenario: unknown start '" + start + "'");
    s.t_end = need_number(spec, "t_end", "scenario");
    s.replicas = need_int(spec, "replicas", "scenario");
    s.sample_count = spec.value("sample_count", 40);
    return s;
}

ClassifierThresholds parse_thresholds(const json& config) {
    ClassifierThresholds th;
    if (config.contains("thresholds")) {
        const json& t = config["thresholds"];
        th.extinct_fraction = t.value("extinct_fraction", th.extinct_fraction);
        th.explode_slope = t.value("explode_slope", th.explode_slope);
        th.survive_fraction = t.value("survive_fraction", th.survive_fraction);
        th.flat_band = t.value("flat_band", th.flat_band);
        th.window_fraction = t.value("window_fraction", th.window_fraction);
        th.min_replicas = t.value("min_replicas", th.min_replicas);
    }
    return th;
}

int run_phases(Context& ctx) {
    const json& spec = need(ctx.config, "phases", "config");
    std::vector<Scenario> scenarios;
    if (spec.value("canonical", false)) {
        scenarios = canonical_scenarios();
    } else {
        for (const auto& s : need(spec, "scenarios", "phases")) {
            scenarios.push_back(parse_scenario(s));
        }
    }
    ClassifierThresholds thresholds = parse_thresholds(spec);
    auto reports = regime_suite(ctx.kernel, scenarios, ctx.seed, ctx.jobs, thresholds);

    auto evidence = ctx.sink.open("phases_evidence.csv");
    CsvWriter csv(evidence);
    csv.header("scenario,target,label,matches,extinct_fraction,slope,slope_ci,late_mean,occupied_fraction");
    auto report = ctx.sink.open("phases_report.txt");
    bool all_match = true;
    for (const auto& rep : reports) {
        csv.field(rep.scenario).field(to_string(rep.target)).field(to_string(rep.label));
        csv.field(rep.matches_target ? 1 : 0).field(rep.evidence.extinct_fraction);
        csv.field(rep.evidence.slope).field(rep.evidence.slope_ci_half_width);
        csv.field(rep.evidence.late_window_mean).field(rep.evidence.site_occupied_fraction);
        csv.endrow();
        report << (rep.matches_target ? "[pass] " : "[FAIL] ") << rep.scenario << ": target="
               << to_string(rep.target) << " label=" << to_string(rep.label)
               << " (extinct=" << rep.evidence.extinct_fraction
               << ", slope=" << rep.evidence.slope << " +- " << rep.evidence.slope_ci_half_width
               << ", occupied=" << rep.evidence.site_occupied_fraction << ")\n";
        all_match = all_match && rep.matches_target;
    }
    report << "rho_hat=" << (reports.empty() ? 0.0 : reports.front().rho_hat)
           << " theta_hat=" << (reports.empty() ? 0.0 : reports.front().theta_hat) << '\n';
    return all_match ? kOk : kRuntimeError;
}

int run_volumes(Context& ctx) {
    const json& spec = need(ctx.config, "volumes", "config");
    std::vector<int> radii;
    for (const auto& r : need(spec, "radii", "volumes")) radii.push_back(r.get<int>());
    Scenario scenario = parse_scenario(need(spec, "scenario", "volumes"));
    auto report = volume_convergence(ctx.kernel, radii, scenario, ctx.seed, ctx.jobs);

    auto out = ctx.sink.open("volumes.csv");
    CsvWriter csv(out);
    csv.header("level,radius,region_size,stat,se");
    for (std::size_t i = 0; i < report.levels.size(); ++i) {
        const auto& l = report.levels[i];
        csv.field(static_cast<int>(i + 1)).field(l.radius).field(l.region_size);
        csv.field(l.stat).field(l.se);
        csv.endrow();
    }
    auto rep = ctx.sink.open("volumes_report.txt");
    rep << report.summary() << '\n';
    return kOk;
}

}  // namespace

int run_config(const std::string& path, const Overrides& overrides) {
    json config;
    {
        std::ifstream in(path);
        if (!in) {
            std::cerr << "rbrw: cannot open config file: " << path << '\n';
            return kParseError;
        }
        try {
            config = json::parse(in);
        } catch (const json::parse_error& e) {
            std::cerr << "rbrw: config parse error: " << e.what() << '\n';
            return kParseError;
        }
    }
    try {
        std::string command = need_string(config, "command", "config");
        if (overrides.command && *overrides.command != command) {
            fail("config: command '" + command + "' does not match the subcommand '" +
                 *overrides.command + "'");
        }
        if (overrides.seed) config["seed"] = *overrides.seed;
        if (!config.contains("seed")) {
            fail("config: missing required field 'seed' (no silent nondeterminism)");
        }
        if (!config["seed"].is_number_unsigned() && !config["seed"].is_number_integer()) {
            fail("config: seed must be an integer");
        }

        Context ctx;
        ctx.config = config;
        ctx.seed = config["seed"].get<std::uint64_t>();
        ctx.jobs = overrides.jobs ? *overrides.jobs : config.value("jobs", 1);
        if (ctx.jobs < 1) fail("config: jobs must be >= 1");
        ctx.graph = parse_graph(need(config, "graph", "config"));
        ctx.kernel = parse_kernel(need(config, "kernel", "config"), ctx.graph);
        std::string out_dir = overrides.output_dir
                                  ? *overrides.output_dir
                                  : config.value("output_dir", std::string("out"));
        ctx.sink.dir = out_dir;

        if (config.value("emit_kernel", false)) {
            auto out = ctx.sink.open("kernel.csv");
            write_kernel_csv(out, ctx.kernel);
        }
        if (config.value("emit_graph", false)) {
            auto out = ctx.sink.open("graph.csv");
            write_graph_csv(out, *ctx.graph);
        }

        int rc;
        if (command == "simulate") rc = run_simulate(ctx);
        else if (command == "couple") rc = run_couple(ctx);
        else if (command == "moments") rc = run_moments(ctx);
        else if (command == "spectral") rc = run_spectral(ctx);
        else if (command == "invariant") rc = run_invariant(ctx);
        else if (command == "phases") rc = run_phases(ctx);
        else if (command == "volumes") rc = run_volumes(ctx);
        else fail("config: unknown command '" + command + "'");

        json manifest = {{"artifact", std::string("rbrw ") + RBRW_VERSION},
                         {"command", command},
                         {"seed", ctx.seed},
                         {"config_hash", config_hash(config)},
                         {"outputs", ctx.sink.files},
                         {"config", config}};
        fs::create_directories(ctx.sink.dir);
        std::ofstream mf(ctx.sink.dir / "manifest.json", std::ios::binary);
        mf << manifest.dump(2) << '\n';
        return rc;
    } catch (const ConfigError& e) {
        std::cerr << "rbrw: " << e.what() << '\n';
        return kValidationError;
    } catch (const json::exception& e) {
        std::cerr << "rbrw: config error: " << e.what() << '\n';
        return kValidationError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "rbrw: " << e.what() << '\n';
        return kValidationError;
    } catch (const std::exception& e) {
        std::cerr << "rbrw: " << e.what() << '\n';
        return kRuntimeError;
    }
}

}  // namespace rbrw::cli
