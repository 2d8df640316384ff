#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rbrw/simulate.hpp"

namespace rbrw {

// One component of the nested coupling: its own region, immortal floor,
// death factor, breeding profile and initial state.
struct CouplingComponent {
    VertexSet region;
    int immortal_floor = 0;  // k_h
    double gamma = 1.0;
    RateProfile profile;     // c_h
    Configuration eta0;
};

struct CouplingSpec {
    std::vector<CouplingComponent> components;  // ordered smallest to largest
};

// Checks every hypothesis of the nested-coupling construction:
//   Lambda_h subset of Lambda_{h+1}; k_h <= k_{h+1}; gamma_h >= gamma_{h+1};
//   c_h(k_{h+1}+m) <= c_{h+1}(k_{h+1}+m) for all m; eta0_h <= eta0_{h+1};
//   eta0_h >= k_h on Lambda_h; and, on Lambda_{h+1} \ Lambda_h, frozen
//   occupancies of component h must not exceed k_{h+1} (deaths in the larger
//   component would otherwise undercut the frozen level).
// Returns the list of violated conditions; empty means ok.
std::vector<std::string> validate_spec(const CouplingSpec& spec);

struct OrderingViolation {
    double time;
    int site;
    int component;                // h with eta_h(x) > eta_{h+1}(x)
    std::vector<int> occupancies; // per-component occupancy at the site
};

struct OrderingCertificate {
    std::uint64_t events = 0;
    std::uint64_t checks = 0;
    std::uint64_t violations = 0;
    std::optional<OrderingViolation> first_violation;

    std::string summary() const;
};

struct CoupledResult {
    std::vector<Trajectory> trajectories;  // one per component
    OrderingCertificate certificate;
};

// Shared-clock realization of all components: per site, a death clock of
// rate max_h(gamma_h) * A(x) and a birth clock of rate max_h(c_h(0)) * A(x)
// with A(x) = max_h eta_h(x); one uniform per ring decides acceptance for
// every component, the birth target being drawn once from the unrestricted
// kernel row. Each marginal is the corresponding single process; the
// ordering is checked after every event and recorded in the certificate.
// max_events = 0 means no event cap.
CoupledResult run_coupled(const Kernel& kernel, const CouplingSpec& spec, double t_end,
                          std::uint64_t seed, const std::vector<double>& sample_times = {},
                          std::uint64_t max_events = 0,
                          const EventObserver& observer = nullptr);

}  // namespace rbrw
