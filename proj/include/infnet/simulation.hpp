#pragma once

#include <infnet/dynamics.hpp>
#include <infnet/scenario.hpp>
#include <infnet/types.hpp>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace infnet {

struct TraceStep {
    PerformanceVector w;
    InfluenceMatrix r;
    BranchCounts counts;

    Step timestamp() const noexcept { return w.timestamp(); }

    friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct SimulationTrace {
    std::vector<std::string> subsystems;
    std::vector<TraceStep> steps;

    BranchCounts total_counts() const {
        BranchCounts c;
        for (const auto& s : steps) c += s.counts;
        return c;
    }

    friend bool operator==(const SimulationTrace&, const SimulationTrace&) = default;
};

/// Checks the structural trace invariants; returns the violations found.
inline std::vector<std::string> validate(const SimulationTrace& trace) {
    std::vector<std::string> out;
    const std::size_t n = trace.subsystems.size();
    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
        const auto& s = trace.steps[k];
        const auto where = "step " + std::to_string(k);
        if (s.w.size() != n || s.r.size() != n) out.push_back(where + ": size mismatch");
        if (s.w.timestamp() != s.r.timestamp()) out.push_back(where + ": W and R timestamps differ");
        if (k > 0 && s.timestamp() != trace.steps[k - 1].timestamp() + 1)
            out.push_back(where + ": timestamps must increase by 1");
    }
    return out;
}

/// Runs `horizon` steps from the scenario seeds. Trace entries are stamped
/// 2, 3, ..., horizon + 1.
inline SimulationTrace simulate(const Scenario& scenario, std::size_t horizon) {
    require_valid(scenario);
    if (horizon < 1) throw validation_error({"horizon must be >= 1"});

    const std::size_t n = scenario.subsystems.size();
    const UtilityMatrix u = resolve_utility(scenario);
    ModelState state{PerformanceVector(scenario.w0, 0), PerformanceVector(scenario.w1, 1),
                     InfluenceMatrix(scenario.r1, 1)};

    SimulationTrace trace;
    trace.subsystems = scenario.subsystems;
    trace.steps.reserve(horizon);
    for (std::size_t k = 0; k < horizon; ++k) {
        const Step next = state.r_curr.timestamp() + 1;
        const auto it = scenario.policy.find(next);
        const auto policy =
            it == scenario.policy.end() ? PolicyIntervention::none(n, next) : PolicyIntervention(it->second, next);
        auto res = step(state, u, policy, scenario.options);
        trace.steps.push_back({res.w_next, res.r_next, res.counts});
        state = ModelState{std::move(state.w_curr), std::move(res.w_next), std::move(res.r_next)};
    }
    return trace;
}

inline SimulationTrace simulate(const Scenario& scenario) { return simulate(scenario, scenario.horizon); }

} // namespace infnet
