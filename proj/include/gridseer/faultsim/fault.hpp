#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridseer/common/error.hpp"
#include "gridseer/faultsim/sequence.hpp"
#include "gridseer/grid/model.hpp"
#include "gridseer/powerflow/newton.hpp"

namespace gridseer::faultsim {

enum class FaultKind { ThreePhase = 0, BranchTrip = 1, LineLine = 2, LineGround = 3 };

inline constexpr std::array<FaultKind, 4> kAllFaultKinds{FaultKind::ThreePhase, FaultKind::BranchTrip,
                                                        FaultKind::LineLine, FaultKind::LineGround};

inline std::string_view to_string(FaultKind k) {
    switch (k) {
        case FaultKind::ThreePhase: return "ThreePhase";
        case FaultKind::BranchTrip: return "BranchTrip";
        case FaultKind::LineLine: return "LineLine";
        case FaultKind::LineGround: return "LineGround";
    }
    return "?";
}

inline std::optional<FaultKind> parse_fault_kind(std::string_view s) {
    for (auto k : kAllFaultKinds)
        if (to_string(k) == s) return k;
    return std::nullopt;
}

struct FaultSpec {
    FaultKind kind = FaultKind::ThreePhase;
    std::optional<int> bus_id;               ///< ThreePhase / LineLine / LineGround
    std::optional<std::size_t> branch_index; ///< BranchTrip
    double z_fault = 0.0;                    ///< resistive fault impedance, 0 = bolted
    int onset_step = 20;

    /// Label bus for the trace; for BranchTrip the caller supplies the case bus.
    std::optional<int> label_bus;

    static FaultSpec at_bus(FaultKind kind, int bus, double z = 0.0, int onset = 20) {
        return {kind, bus, std::nullopt, z, onset, bus};
    }
    static FaultSpec trip(std::size_t branch, int label, int onset = 20) {
        return {FaultKind::BranchTrip, std::nullopt, branch, 0.0, onset, label};
    }
};

inline void validate(const FaultSpec& f, const grid::GridState& g) {
    const bool trip = f.kind == FaultKind::BranchTrip;
    if (trip != f.branch_index.has_value() || trip == f.bus_id.has_value())
        throw ValidationError("FaultSpec must set exactly one of bus_id/branch_index matching its kind");
    if (!std::isfinite(f.z_fault) || f.z_fault < 0.0)
        throw ValidationError("FaultSpec z_fault must be finite and >= 0");
    if (f.onset_step < 10 || f.onset_step > 50)
        throw ValidationError("FaultSpec onset_step must lie in [10, 50]");
    if (trip && *f.branch_index >= g.branches.size())
        throw ValidationError("FaultSpec branch_index out of range");
    if (!trip && (*f.bus_id < 1 || *f.bus_id > static_cast<int>(g.bus_count())))
        throw ValidationError("FaultSpec bus_id out of range");
}

/// During-fault state for one fault.
struct FaultResult {
    /// Per-bus voltage magnitude; the lowest of the three phase magnitudes
    /// (equal to |V1| for balanced faults).
    std::vector<double> v_mag;
    /// Phase-a fault current magnitude for shunt faults (3*I0 for LG,
    /// |I_b| for LL), zero for branch trips.
    double fault_current = 0.0;
};

namespace detail {

inline double min_phase_magnitude(const SequenceValues& s) {
    const auto abc = phase_values(s);
    return std::min({std::abs(abc[0]), std::abs(abc[1]), std::abs(abc[2])});
}

}  // namespace detail

/// Shunt faults use the prefault phasors plus superposition through the
/// sequence transfer impedances. BranchTrip re-solves the power flow with
/// the branch removed, warm-started from the prefault state.
inline FaultResult fault_voltages(const grid::GridState& g, const FaultSpec& spec,
                                  const powerflow::PowerFlowSolution& prefault,
                                  const SequenceNetworks& nets) {
    validate(spec, g);
    const std::size_t n = g.bus_count();
    FaultResult out;
    out.v_mag.resize(n);

    if (spec.kind == FaultKind::BranchTrip) {
        grid::GridState tripped = powerflow::with_voltages(g, prefault);
        tripped.branches[*spec.branch_index].in_service = false;
        const auto sol = powerflow::solve_powerflow(tripped);
        out.v_mag = sol.v_mag;
        return out;
    }

    const auto vpre = prefault.phasors();
    const auto f = static_cast<std::size_t>(*spec.bus_id - 1);
    const cdouble zf(spec.z_fault, 0.0);
    const cdouble z1 = nets.z1(f, f), z2 = nets.z2(f, f), z0 = nets.z0(f, f);

    // Sequence currents flowing out of the network into the fault.
    cdouble i0{}, i1{}, i2{};
    switch (spec.kind) {
        case FaultKind::ThreePhase:
            i1 = vpre[f] / (z1 + zf);
            out.fault_current = std::abs(i1);
            break;
        case FaultKind::LineGround:
            i1 = i2 = i0 = vpre[f] / (z1 + z2 + z0 + 3.0 * zf);
            out.fault_current = std::abs(3.0 * i0);
            break;
        case FaultKind::LineLine:
            i1 = vpre[f] / (z1 + z2 + zf);
            i2 = -i1;
            out.fault_current = std::abs(phase_values({0.0, i1, i2})[1]);
            break;
        case FaultKind::BranchTrip: break;
    }

    for (std::size_t k = 0; k < n; ++k) {
        SequenceValues v{-nets.z0(k, f) * i0, vpre[k] - nets.z1(k, f) * i1, -nets.z2(k, f) * i2};
        if (k == f && spec.kind == FaultKind::ThreePhase) v.positive = zf * i1;  // exact fault-point condition
        out.v_mag[k] = spec.kind == FaultKind::ThreePhase ? std::abs(v.positive)
                                                          : detail::min_phase_magnitude(v);
    }
    return out;
}

inline FaultResult fault_voltages(const grid::GridState& g, const FaultSpec& spec) {
    const auto pre = powerflow::solve_powerflow(g);
    return fault_voltages(g, spec, pre, SequenceNetworks(g));
}

/// Branch tripped by each bus's BranchTrip case (index = bus id - 1). Greedy
/// in bus-id order: the in-service incident branch with the largest prefault
/// flow that no lower-numbered bus has claimed; if all are claimed, the
/// largest-flow incident branch.
inline std::vector<std::size_t> designated_trip_branches(const grid::GridState& g,
                                                         const powerflow::PowerFlowSolution& pre) {
    const std::size_t n = g.bus_count();
    std::vector<std::size_t> out(n);
    std::vector<bool> claimed(g.branches.size(), false);
    for (std::size_t b = 0; b < n; ++b) {
        const int id = static_cast<int>(b) + 1;
        std::optional<std::size_t> best_free, best_any;
        for (std::size_t k = 0; k < g.branches.size(); ++k) {
            const auto& br = g.branches[k];
            if (!br.in_service || (br.from_bus != id && br.to_bus != id)) continue;
            if (!best_any || pre.branch_flows[k] > pre.branch_flows[*best_any]) best_any = k;
            if (!claimed[k] && (!best_free || pre.branch_flows[k] > pre.branch_flows[*best_free]))
                best_free = k;
        }
        if (!best_any) throw SingularNetwork("bus " + std::to_string(id) + " has no in-service branch");
        out[b] = best_free.value_or(*best_any);
        claimed[out[b]] = true;
    }
    return out;
}

}  // namespace gridseer::faultsim
