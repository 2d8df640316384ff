#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rbrw/simulate.hpp"

namespace rbrw {

// Classifier thresholds. These are artifact conventions for reading Monte
// Carlo evidence, not model quantities; they live in one block so configs
// can override them wholesale.
struct ClassifierThresholds {
    double extinct_fraction = 0.95;    // extinct: fraction of replicas extinct by t_end
    double explode_slope = 0.05;       // exploding-mean: fitted log-mean slope above this
    double survive_fraction = 0.20;    // surviving: fixed site occupied at t_end
    double flat_band = 0.05;           // bounded-mean: |slope| inside the band, CI contains 0
    double window_fraction = 0.60;     // slope fit over the final fraction of the horizon
    int min_replicas = 50;
};

// Replica-level evidence the classifier consumes.
struct ReplicaSummaries {
    std::vector<double> sample_times;
    std::vector<std::vector<double>> total_mass;  // [replica][time]
    std::vector<char> extinct;                    // by t_end
    std::vector<char> site_occupied_at_end;       // tracked site occupied at t_end
};

struct RegimeEvidence {
    double extinct_fraction = 0.0;
    double slope = 0.0;
    double slope_ci_half_width = 0.0;
    double late_window_mean = 0.0;     // pooled mean total mass over the fit window
    double site_occupied_fraction = 0.0;
};

// The four behaviors are not mutually exclusive (a surviving equilibrium is
// also bounded), so the classifier reports one flag per aspect.
struct RegimeFlags {
    bool extinct = false;
    bool exploding_mean = false;
    bool bounded_mean = false;
    bool surviving = false;
};

enum class RegimeLabel { Extinct, Surviving, ExplodingMean, BoundedMean };

std::string to_string(RegimeLabel label);

struct Classification {
    RegimeFlags flags;
    RegimeEvidence evidence;

    bool has(RegimeLabel label) const;
};

// Deterministic function of the summaries and thresholds. Throws when fewer
// than min_replicas replicas are supplied.
Classification classify_run(const ReplicaSummaries& summaries,
                            const ClassifierThresholds& thresholds);

struct Scenario {
    std::string name;
    RegimeLabel target;
    RateProfile profile;
    double gamma = 1.0;
    int immortal_floor = 0;
    enum class Start { Delta, Ones } start = Start::Delta;
    double t_end = 10.0;
    int replicas = 200;
    int sample_count = 40;
    int tracked_site = 0;
};

struct RegimeReport {
    std::string scenario;
    RegimeLabel target;
    RegimeLabel label;          // primary label by precedence
    bool matches_target = false;
    RegimeFlags flags;
    RegimeEvidence evidence;
    double rho_hat = 0.0;
    double theta_hat = 0.0;
};

ReplicaSummaries run_scenario(const Kernel& kernel, const Scenario& scenario,
                              std::uint64_t seed, int jobs);

// One report per scenario; rho/theta estimates annotate the regime targets.
std::vector<RegimeReport> regime_suite(const Kernel& kernel,
                                       const std::vector<Scenario>& scenarios,
                                       std::uint64_t seed, int jobs,
                                       const ClassifierThresholds& thresholds = {});

// The four canonical scenarios on a translation-invariant kernel: constant
// subcritical (extinct), a steep profile whose contact-process truncation
// survives a pilot run (surviving), constant supercritical (exploding
// mean), and the steep profile from a bounded start (bounded mean).
std::vector<Scenario> canonical_scenarios();

struct VolumeLevel {
    int radius = 0;
    int region_size = 0;
    double stat = 0.0;  // mean occupancy at the root at t_end
    double se = 0.0;
};

struct VolumeReport {
    std::vector<VolumeLevel> levels;
    std::vector<double> successive_diff;  // |stat_m - stat_{m+1}|
    bool last_two_agree = false;          // within 3 combined SE
    bool systematic_drift = false;        // monotone drift beyond noise across all levels

    std::string summary() const;
};

// Same scenario on a nested ladder of balls around the root with shared
// replica seeds; reports how the local statistic stabilizes as the region
// grows.
VolumeReport volume_convergence(const Kernel& kernel, const std::vector<int>& radii,
                                const Scenario& scenario, std::uint64_t seed, int jobs);

}  // namespace rbrw
