#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "gridseer/common/rng.hpp"
#include "gridseer/faultsim/fault.hpp"

namespace gridseer::faultsim {

/// Label of a trace: one of the four fault kinds or no fault at all.
enum class TraceKind { NoFault = -1, ThreePhase = 0, BranchTrip = 1, LineLine = 2, LineGround = 3 };

inline TraceKind trace_kind(FaultKind k) { return static_cast<TraceKind>(static_cast<int>(k)); }

inline std::string_view to_string(TraceKind k) {
    if (k == TraceKind::NoFault) return "NoFault";
    return to_string(static_cast<FaultKind>(static_cast<int>(k)));
}

inline std::optional<TraceKind> parse_trace_kind(std::string_view s) {
    if (s == "NoFault") return TraceKind::NoFault;
    if (auto k = parse_fault_kind(s)) return trace_kind(*k);
    return std::nullopt;
}

/// T x N voltage magnitudes, time-major: sample(t, bus_index).
struct VoltageTrace {
    std::size_t steps = 0;
    std::size_t buses = 0;
    double dt = 0.040;
    std::vector<double> samples;
    TraceKind label_kind = TraceKind::NoFault;
    int label_bus = 0;

    double& at(std::size_t t, std::size_t b) { return samples[t * buses + b]; }
    double at(std::size_t t, std::size_t b) const { return samples[t * buses + b]; }

    bool operator==(const VoltageTrace&) const = default;
};

struct TraceOptions {
    std::size_t steps = 100;
    double dt = 0.040;
    double noise_sigma = 0.002;
    double load_perturbation = 0.05;
    double swing_tau = 0.5;
    double swing_freq = 1.5;
};

/// Fraction of the prefault-to-fault gap recovered `elapsed` seconds after
/// onset: zero at onset, a damped electromechanical swing afterwards. Always
/// in [0, 1).
inline double swing_factor(double elapsed, const TraceOptions& opt) {
    return std::exp(-elapsed / opt.swing_tau) *
           (1.0 - std::cos(2.0 * std::numbers::pi * opt.swing_freq * elapsed)) / 2.0;
}

/// Applies the seeded load perturbation used for every trace.
inline grid::GridState perturb_loads(grid::GridState g, Rng& rng, double fraction) {
    for (auto& b : g.buses) {
        const double f = 1.0 + rng.uniform(-fraction, fraction);
        b.p_load *= f;
        b.q_load *= f;
    }
    return g;
}

/// Deterministic in (grid, spec, seed). `nets` must be built from `g`
/// (sequence networks do not depend on loads, so one instance serves every
/// perturbed copy).
inline VoltageTrace synthesize_trace(const grid::GridState& g, const std::optional<FaultSpec>& spec,
                                     std::uint64_t seed, const SequenceNetworks& nets,
                                     const TraceOptions& opt = {}) {
    Rng rng(seed);
    const grid::GridState perturbed = perturb_loads(g, rng, opt.load_perturbation);
    const auto pre = powerflow::solve_powerflow(perturbed);

    const std::size_t n = g.bus_count();
    VoltageTrace tr;
    tr.steps = opt.steps;
    tr.buses = n;
    tr.dt = opt.dt;
    tr.samples.resize(opt.steps * n);

    std::vector<double> during;
    std::size_t onset = opt.steps;
    if (spec) {
        during = fault_voltages(perturbed, *spec, pre, nets).v_mag;
        onset = static_cast<std::size_t>(spec->onset_step);
        tr.label_kind = trace_kind(spec->kind);
        tr.label_bus = spec->label_bus.value_or(spec->bus_id.value_or(0));
    }

    for (std::size_t t = 0; t < opt.steps; ++t) {
        const double s = t >= onset ? swing_factor(static_cast<double>(t - onset) * opt.dt, opt) : 0.0;
        for (std::size_t b = 0; b < n; ++b) {
            const double clean = t < onset ? pre.v_mag[b] : during[b] + (pre.v_mag[b] - during[b]) * s;
            tr.at(t, b) = std::clamp(clean + rng.normal(0.0, opt.noise_sigma), 0.0, 2.0);
        }
    }
    return tr;
}

inline VoltageTrace synthesize_trace(const grid::GridState& g, const std::optional<FaultSpec>& spec,
                                     std::uint64_t seed, const TraceOptions& opt = {}) {
    return synthesize_trace(g, spec, seed, SequenceNetworks(g), opt);
}

}  // namespace gridseer::faultsim
