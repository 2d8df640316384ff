#include "rbrw/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rbrw/rng.hpp"
#include "rbrw/sum_tree.hpp"

namespace rbrw {

namespace {

void validate_params(const Kernel& kernel, const SimParams& params, const Configuration& eta0) {
    if (params.region.empty()) throw std::invalid_argument("active region is empty");
    if (!std::isfinite(params.t_end) || params.t_end < 0.0) {
        throw std::invalid_argument("t_end must be finite and nonnegative");
    }
    if (params.gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
    if (params.immortal_floor < 0) throw std::invalid_argument("immortal floor must be >= 0");
    if (eta0.size() != kernel.vertex_count()) {
        throw std::invalid_argument("initial configuration size mismatch");
    }
    for (int v : params.region.members()) {
        if (eta0(v) < params.immortal_floor) {
            throw std::invalid_argument("initial configuration below the immortal floor");
        }
    }
    if (!params.frozen_exterior) {
        for (int v = 0; v < eta0.size(); ++v) {
            if (eta0(v) > 0 && !params.region.contains(v)) {
                throw std::invalid_argument(
                    "initial configuration has exterior particles but frozen_exterior is off");
            }
        }
    }
    for (std::size_t i = 1; i < params.sample_times.size(); ++i) {
        if (!(params.sample_times[i] > params.sample_times[i - 1])) {
            throw std::invalid_argument("sample times must be strictly increasing");
        }
    }
}

}  // namespace

Trajectory run_sim(const Kernel& kernel, const SimParams& params, const Configuration& eta0,
                   const EventObserver& observer) {
    validate_params(kernel, params, eta0);

    const double gamma = params.gamma;
    const double lambda = params.profile.lambda();
    const int k = params.immortal_floor;
    const double rate_per_particle = gamma + lambda;

    Configuration state = eta0;
    Rng rng(params.seed);

    // Dominating per-site rate (gamma + lambda) * eta(x) on the region;
    // thinning recovers the floor and the c(eta(y))/lambda filter exactly.
    SumTree rates(state.size());
    long long mortal = 0;
    for (int x : params.region.members()) {
        rates.set(x, rate_per_particle * state(x));
        mortal += state(x) - k;
    }

    Trajectory traj;
    traj.seed = params.seed;
    double t = 0.0;
    std::size_t next_sample = 0;
    auto flush_samples_until = [&](double horizon) {
        while (next_sample < params.sample_times.size() &&
               params.sample_times[next_sample] <= horizon) {
            traj.sample_times.push_back(params.sample_times[next_sample]);
            traj.samples.push_back(state);
            ++next_sample;
        }
    };

    if (k == 0 && mortal == 0) traj.extinction_time = 0.0;

    while (true) {
        double total_rate = rates.total();
        if (total_rate <= 0.0) {
            flush_samples_until(params.t_end);
            break;
        }
        double t_next = t + rng.exponential(total_rate);
        if (t_next <= t) t_next = std::nextafter(t, std::numeric_limits<double>::infinity());
        // the state over [t, t_next) is what samples in that window see
        flush_samples_until(std::min(std::nextafter(t_next, 0.0), params.t_end));
        if (t_next > params.t_end) break;
        t = t_next;

        int x = rates.sample(rng.uniform01() * total_rate);
        Event ev{};
        ev.time = t;
        ev.site = x;
        if (rng.uniform01() * rate_per_particle < gamma) {
            // death attempt: true rate gamma * (eta(x) - k)^+
            ev.kind = EventKind::Death;
            ev.target = x;
            ev.occ_before = state(x);
            int excess = state(x) - k;
            ev.accepted = rng.uniform01() * state(x) < static_cast<double>(excess);
            if (ev.accepted) {
                state.add(x, -1);
                --mortal;
                rates.set(x, rate_per_particle * state(x));
                if (k == 0 && mortal == 0 && !traj.extinction_time) traj.extinction_time = t;
            }
            ev.occ_after = state(x);
        } else {
            // birth attempt from x: draw the target from the kernel row,
            // discard draws falling outside the region or into lost mass
            ev.kind = EventKind::BirthAttempt;
            double u = rng.uniform01();
            int y = -1;
            double cum = 0.0;
            for (const auto& e : kernel.rows[x]) {
                cum += e.weight;
                if (u < cum) {
                    y = e.target;
                    break;
                }
            }
            if (y >= 0 && !params.region.contains(y)) y = -1;
            ev.target = y;
            if (y < 0) {
                ev.accepted = false;
                ev.occ_before = ev.occ_after = 0;
            } else {
                ev.occ_before = state(y);
                double accept = params.profile(state(y)) / lambda;
                ev.accepted = rng.uniform01() < accept;
                if (ev.accepted) {
                    state.add(y, +1);
                    ++mortal;
                    rates.set(y, rate_per_particle * state(y));
                }
                ev.occ_after = state(y);
            }
        }
        ++traj.event_count;
        if (observer) observer(ev, state);
    }
    return traj;
}

Statistic statistic_from_string(const std::string& name) {
    if (name == "site-mean") return Statistic::SiteMean;
    if (name == "total-mass") return Statistic::TotalMass;
    if (name == "extinct-flag") return Statistic::ExtinctFlag;
    if (name == "occupancy-histogram") return Statistic::OccupancyHistogram;
    throw std::invalid_argument("unknown statistic: " + name);
}

std::string to_string(Statistic s) {
    switch (s) {
        case Statistic::SiteMean: return "site-mean";
        case Statistic::TotalMass: return "total-mass";
        case Statistic::ExtinctFlag: return "extinct-flag";
        case Statistic::OccupancyHistogram: return "occupancy-histogram";
    }
    return "?";
}

std::vector<double> summarize(const Trajectory& trajectory, Statistic what,
                              const VertexSet& region) {
    std::vector<double> out;
    out.reserve(trajectory.samples.size());
    for (std::size_t i = 0; i < trajectory.samples.size(); ++i) {
        const Configuration& cfg = trajectory.samples[i];
        switch (what) {
            case Statistic::SiteMean: {
                double s = 0.0;
                for (int v : region.members()) s += cfg(v);
                out.push_back(region.size() > 0 ? s / region.size() : 0.0);
                break;
            }
            case Statistic::TotalMass:
                out.push_back(static_cast<double>(cfg.total()));
                break;
            case Statistic::ExtinctFlag:
                out.push_back(trajectory.extinction_time &&
                                      *trajectory.extinction_time <= trajectory.sample_times[i]
                                  ? 1.0
                                  : 0.0);
                break;
            case Statistic::OccupancyHistogram:
                throw std::invalid_argument("use occupancy_histogram() for pooled histograms");
        }
    }
    return out;
}

std::vector<long long> occupancy_histogram(const Trajectory& trajectory, int time_index,
                                           const VertexSet& region) {
    const Configuration& cfg = trajectory.samples.at(static_cast<std::size_t>(time_index));
    int max_occ = 0;
    for (int v : region.members()) max_occ = std::max(max_occ, cfg(v));
    std::vector<long long> hist(static_cast<std::size_t>(max_occ) + 1, 0);
    for (int v : region.members()) ++hist[static_cast<std::size_t>(cfg(v))];
    return hist;
}

}  // namespace rbrw
