#include "rbrw/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rbrw/rng.hpp"
#include "rbrw/sum_tree.hpp"

namespace rbrw {

std::vector<std::string> validate_spec(const CouplingSpec& spec) {
    std::vector<std::string> violations;
    const auto& comps = spec.components;
    if (comps.empty()) {
        violations.push_back("coupling spec has no components");
        return violations;
    }
    for (std::size_t h = 0; h < comps.size(); ++h) {
        const auto& c = comps[h];
        std::string tag = "component " + std::to_string(h + 1);
        if (c.region.empty()) violations.push_back(tag + ": empty region");
        if (c.gamma < 0.0) violations.push_back(tag + ": negative gamma");
        if (c.immortal_floor < 0) violations.push_back(tag + ": negative immortal floor");
        for (int v : c.region.members()) {
            if (c.eta0(v) < c.immortal_floor) {
                violations.push_back(tag + ": initial state below the immortal floor");
                break;
            }
        }
    }
    for (std::size_t h = 0; h + 1 < comps.size(); ++h) {
        const auto& lo = comps[h];
        const auto& hi = comps[h + 1];
        std::string pair = "components " + std::to_string(h + 1) + "," + std::to_string(h + 2);
        if (!lo.region.subset_of(hi.region)) violations.push_back(pair + ": regions not nested");
        if (lo.immortal_floor > hi.immortal_floor) {
            violations.push_back(pair + ": immortal floors not nondecreasing");
        }
        if (lo.gamma < hi.gamma - 1e-15) {
            violations.push_back(pair + ": death factors not nonincreasing");
        }
        if (!profiles_coupling_compatible(lo.profile, hi.profile, hi.immortal_floor)) {
            violations.push_back(pair + ": profiles incompatible above the upper floor");
        }
        if (!lo.eta0.leq(hi.eta0)) {
            violations.push_back(pair + ": initial states not ordered");
        }
        // Frozen-site hazard: on Lambda_{h+1} \ Lambda_h the lower component
        // is frozen while the upper one can die down to its floor.
        for (int v : hi.region.members()) {
            if (!lo.region.contains(v) && lo.eta0(v) > hi.immortal_floor && hi.gamma > 0.0) {
                violations.push_back(pair +
                                     ": frozen occupancy of the lower component exceeds the "
                                     "upper floor on the region difference");
                break;
            }
        }
    }
    return violations;
}

std::string OrderingCertificate::summary() const {
    std::ostringstream os;
    os << "events=" << events << " checks=" << checks << " violations=" << violations;
    if (first_violation) {
        os << " first at t=" << first_violation->time << " site=" << first_violation->site
           << " component=" << first_violation->component;
    }
    return os.str();
}

CoupledResult run_coupled(const Kernel& kernel, const CouplingSpec& spec, double t_end,
                          std::uint64_t seed, const std::vector<double>& sample_times,
                          std::uint64_t max_events, const EventObserver& observer) {
    auto violations = validate_spec(spec);
    if (!violations.empty()) {
        throw std::invalid_argument("invalid coupling spec: " + violations.front());
    }
    if (!std::isfinite(t_end) || t_end < 0.0) {
        throw std::invalid_argument("t_end must be finite and nonnegative");
    }
    const int N = static_cast<int>(spec.components.size());
    const int V = kernel.vertex_count();
    for (const auto& c : spec.components) {
        if (c.eta0.size() != V) throw std::invalid_argument("initial configuration size mismatch");
    }

    double gamma_bar = 0.0, c_bar = 0.0;
    for (const auto& c : spec.components) {
        gamma_bar = std::max(gamma_bar, c.gamma);
        c_bar = std::max(c_bar, c.profile.lambda());
    }
    const double rate_factor = gamma_bar + c_bar;

    std::vector<Configuration> state;
    state.reserve(static_cast<std::size_t>(N));
    for (const auto& c : spec.components) state.push_back(c.eta0);

    // Clocks live on the largest region; A(x) = max_h eta_h(x).
    const VertexSet& top_region = spec.components.back().region;
    auto a_of = [&](int x) {
        int a = 0;
        for (const auto& s : state) a = std::max(a, s(x));
        return a;
    };
    SumTree rates(V);
    for (int x : top_region.members()) rates.set(x, rate_factor * a_of(x));

    CoupledResult result;
    result.trajectories.assign(static_cast<std::size_t>(N), Trajectory{});
    for (auto& tr : result.trajectories) tr.seed = seed;
    auto& cert = result.certificate;

    Rng rng(seed);
    double t = 0.0;
    std::size_t next_sample = 0;
    auto flush_samples_until = [&](double horizon) {
        while (next_sample < sample_times.size() && sample_times[next_sample] <= horizon) {
            for (int h = 0; h < N; ++h) {
                result.trajectories[static_cast<std::size_t>(h)].sample_times.push_back(
                    sample_times[next_sample]);
                result.trajectories[static_cast<std::size_t>(h)].samples.push_back(
                    state[static_cast<std::size_t>(h)]);
            }
            ++next_sample;
        }
    };

    auto check_order = [&](double when, int x) {
        ++cert.checks;
        for (int h = 0; h + 1 < N; ++h) {
            if (state[static_cast<std::size_t>(h)](x) >
                state[static_cast<std::size_t>(h + 1)](x)) {
                ++cert.violations;
                if (!cert.first_violation) {
                    OrderingViolation v;
                    v.time = when;
                    v.site = x;
                    v.component = h + 1;
                    for (int j = 0; j < N; ++j) {
                        v.occupancies.push_back(state[static_cast<std::size_t>(j)](x));
                    }
                    cert.first_violation = v;
                }
            }
        }
    };

    while (true) {
        if (max_events > 0 && cert.events >= max_events) {
            flush_samples_until(t_end);
            break;
        }
        double total_rate = rates.total();
        if (total_rate <= 0.0) {
            flush_samples_until(t_end);
            break;
        }
        double t_next = t + rng.exponential(total_rate);
        if (t_next <= t) t_next = std::nextafter(t, std::numeric_limits<double>::infinity());
        flush_samples_until(std::min(std::nextafter(t_next, 0.0), t_end));
        if (t_next > t_end) break;
        t = t_next;

        int x = rates.sample(rng.uniform01() * total_rate);
        double ax = static_cast<double>(a_of(x));
        Event ev{};
        ev.time = t;
        ev.site = x;
        if (rng.uniform01() * rate_factor < gamma_bar) {
            // death ring: one U shared by all components
            ev.kind = EventKind::Death;
            ev.target = x;
            double threshold_scale = gamma_bar * ax;
            double u = rng.uniform01();
            bool any = false;
            for (int h = 0; h < N; ++h) {
                const auto& comp = spec.components[static_cast<std::size_t>(h)];
                auto& st = state[static_cast<std::size_t>(h)];
                if (!comp.region.contains(x)) continue;
                int excess = st(x) - comp.immortal_floor;
                if (excess <= 0) continue;
                double threshold = comp.gamma * excess / threshold_scale;
                if (u <= threshold) {
                    st.add(x, -1);
                    any = true;
                }
            }
            ev.accepted = any;
            rates.set(x, rate_factor * a_of(x));
            check_order(t, x);
        } else {
            // birth ring: target drawn once from the unrestricted row of x,
            // one V shared by all components
            ev.kind = EventKind::BirthAttempt;
            double u = rng.uniform01();
            int y = -1;
            double pxy = 0.0, cum = 0.0;
            for (const auto& e : kernel.rows[x]) {
                cum += e.weight;
                if (u < cum) {
                    y = e.target;
                    pxy = e.weight;
                    break;
                }
            }
            ev.target = y;
            if (y >= 0) {
                double threshold_scale = c_bar * ax * pxy;
                double v = rng.uniform01();
                bool any = false;
                for (int h = 0; h < N; ++h) {
                    const auto& comp = spec.components[static_cast<std::size_t>(h)];
                    auto& st = state[static_cast<std::size_t>(h)];
                    // p_{Lambda_h}(x,y) = p(x,y) iff both endpoints lie in Lambda_h
                    if (!comp.region.contains(x) || !comp.region.contains(y)) continue;
                    double threshold =
                        st(x) * pxy * comp.profile(st(y)) / threshold_scale;
                    if (v <= threshold) {
                        st.add(y, +1);
                        any = true;
                    }
                }
                ev.accepted = any;
                rates.set(y, rate_factor * a_of(y));
                check_order(t, y);
            } else {
                ev.accepted = false;
            }
        }
        ++cert.events;
        if (observer) observer(ev, state.back());
    }
    return result;
}

}  // namespace rbrw
