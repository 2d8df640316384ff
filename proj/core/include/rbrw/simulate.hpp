#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rbrw/configuration.hpp"
#include "rbrw/graph.hpp"
#include "rbrw/profile.hpp"

namespace rbrw {

// Parameters of one realization of the generator: per site x in the active
// region, deaths at rate gamma*(eta(x)-k)^+ and birth attempts at rate
// eta(x)*c(0) with target y ~ p(x,.), accepted with probability
// c(eta(y))/c(0). Draws landing outside the region are discarded, which
// realizes the restricted kernel exactly. The main model is gamma = 1,
// k = 0; k > 0 adds an immortal floor per site.
struct SimParams {
    double gamma = 1.0;
    int immortal_floor = 0;  // k
    VertexSet region;        // active region Lambda
    RateProfile profile;
    double t_end = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> sample_times;   // strictly increasing
    bool frozen_exterior = true;        // exterior occupancies carried, never acting
};

enum class EventKind { Death, BirthAttempt };

struct Event {
    double time;
    int site;        // where the clock fired
    EventKind kind;
    int target;      // vertex changed by a birth (-1: draw fell outside the region)
    bool accepted;
    int occ_before;  // occupancy of the changed vertex (site for deaths, target for births)
    int occ_after;

    int changed_vertex() const { return kind == EventKind::Death ? site : target; }
};

// Called on every event, accepted or not, after the state update.
using EventObserver = std::function<void(const Event&, const Configuration&)>;

struct Trajectory {
    std::vector<double> sample_times;
    std::vector<Configuration> samples;       // state at each sample time
    std::optional<double> extinction_time;    // k = 0 only: first time with no particles left
    std::uint64_t event_count = 0;
    std::uint64_t seed = 0;
};

// Exact event-driven realization of the chain; deterministic given the seed.
Trajectory run_sim(const Kernel& kernel, const SimParams& params, const Configuration& eta0,
                   const EventObserver& observer = nullptr);

enum class Statistic { SiteMean, TotalMass, ExtinctFlag, OccupancyHistogram };

Statistic statistic_from_string(const std::string& name);
std::string to_string(Statistic s);

// Requested statistic at each sample time. SiteMean averages over the
// region; TotalMass counts every particle; ExtinctFlag is the indicator
// {extinction happened by t}.
std::vector<double> summarize(const Trajectory& trajectory, Statistic what,
                              const VertexSet& region);

// Occupancy counts pooled over the region's sites at one sample time;
// index j holds the number of sites with occupancy j.
std::vector<long long> occupancy_histogram(const Trajectory& trajectory, int time_index,
                                           const VertexSet& region);

}  // namespace rbrw
