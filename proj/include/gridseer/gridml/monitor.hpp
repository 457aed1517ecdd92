#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridseer/gridml/fault_models.hpp"

namespace gridseer::gridml {

struct MonitorEmission {
    std::size_t step = 0;            ///< index of the newest sample in the window
    std::optional<faultsim::FaultKind> kind;  ///< empty when healthy
    int bus = 0;                     ///< 0 = healthy
    double confidence = 0.0;         ///< locator probability of `bus`
};

/// Sliding window of the last T samples. Each full window is typed by the
/// fault-type model and then located by that kind's locator.
class StreamMonitor {
public:
    StreamMonitor(nn::ModelParams fault_model, std::map<faultsim::FaultKind, nn::ModelParams> locators)
        : type_(std::move(fault_model)), locators_(std::move(locators)) {
        if (type_.kind != nn::ModelKind::FaultType) throw ShapeMismatch("monitor needs a FaultType model");
        steps_ = type_.metadata.at("steps").get<std::size_t>();
        buses_ = type_.metadata.at("buses").get<std::size_t>();
        for (auto k : fault_type_classes(type_.metadata.at("paper_mode").get<bool>())) {
            const auto it = locators_.find(k);
            if (it == locators_.end())
                throw ValidationError("no locator for " + std::string(to_string(k)));
            if (it->second.kind != nn::ModelKind::BusLocator)
                throw ShapeMismatch("locator for " + std::string(to_string(k)) + " is not a BusLocator model");
        }
        trace_.steps = steps_;
        trace_.buses = buses_;
    }

    std::size_t window() const noexcept { return steps_; }
    void reset() {
        window_.clear();
        count_ = 0;
    }
    std::size_t buses() const noexcept { return buses_; }

    std::optional<MonitorEmission> push(const std::vector<double>& sample) {
        if (sample.size() != buses_) throw ShapeMismatch("sample has the wrong number of buses");
        window_.push_back(sample);
        if (window_.size() > steps_) window_.pop_front();
        const std::size_t step = count_++;
        if (window_.size() < steps_) return std::nullopt;
        trace_.samples.clear();
        for (const auto& s : window_) trace_.samples.insert(trace_.samples.end(), s.begin(), s.end());
        const auto kind = classify_fault_type(type_, trace_);
        const auto loc = locate_fault(locators_.at(kind.kind), trace_);
        MonitorEmission e;
        e.step = step;
        e.bus = loc.bus;
        if (loc.bus != 0) e.kind = kind.kind;
        e.confidence = loc.probabilities[static_cast<std::size_t>(loc.bus)];
        return e;
    }

private:
    nn::ModelParams type_;
    std::map<faultsim::FaultKind, nn::ModelParams> locators_;
    std::size_t steps_ = 0;
    std::size_t buses_ = 0;
    std::size_t count_ = 0;
    std::deque<std::vector<double>> window_;
    faultsim::VoltageTrace trace_;
};

/// A continuous sample stream: prefault magnitudes plus noise, then from
/// `onset` on the same fault envelope the training traces use. Unlike a
/// training trace the onset may lie anywhere in the stream.
struct SyntheticStream {
    std::vector<std::vector<double>> samples;
    std::size_t onset = 0;
    faultsim::FaultKind kind = faultsim::FaultKind::ThreePhase;
    int bus = 0;
};

inline SyntheticStream synthetic_stream(const grid::GridState& g, const faultsim::SequenceNetworks& nets,
                                        faultsim::FaultKind kind, int bus, std::size_t trip_branch,
                                        std::size_t length, std::size_t onset, std::uint64_t seed,
                                        const faultsim::TraceOptions& opt = {}) {
    Rng rng(seed);
    const grid::GridState perturbed = faultsim::perturb_loads(g, rng, opt.load_perturbation);
    const auto pre = powerflow::solve_powerflow(perturbed);
    const auto spec = kind == faultsim::FaultKind::BranchTrip ? faultsim::FaultSpec::trip(trip_branch, bus)
                                                              : faultsim::FaultSpec::at_bus(kind, bus);
    const auto during = faultsim::fault_voltages(perturbed, spec, pre, nets).v_mag;
    SyntheticStream out;
    out.onset = onset;
    out.kind = kind;
    out.bus = bus;
    out.samples.resize(length, std::vector<double>(g.bus_count()));
    for (std::size_t t = 0; t < length; ++t) {
        const double sw = t >= onset ? faultsim::swing_factor(static_cast<double>(t - onset) * opt.dt, opt) : 0.0;
        for (std::size_t b = 0; b < g.bus_count(); ++b) {
            const double clean = t < onset ? pre.v_mag[b] : during[b] + (pre.v_mag[b] - during[b]) * sw;
            out.samples[t][b] = std::clamp(clean + rng.normal(0.0, opt.noise_sigma), 0.0, 2.0);
        }
    }
    return out;
}

struct DetectionOutcome {
    bool detected = false;          ///< first non-zero bus at or after onset, within the deadline
    bool false_alarm = false;       ///< non-zero bus before onset
    std::size_t delay = 0;          ///< samples from onset to the first non-zero emission
    std::optional<faultsim::FaultKind> kind;  ///< kind of that emission
    int bus = 0;
    /// Emission at step onset + deadline, when the stream reaches it.
    std::optional<MonitorEmission> at_deadline;
};

/// Feeds the stream through a fresh window, reports the first non-zero
/// emission and keeps the emission at the deadline step.
inline DetectionOutcome run_detection(StreamMonitor& mon, const SyntheticStream& s, std::size_t deadline) {
    DetectionOutcome out;
    mon.reset();
    bool seen = false;
    for (const auto& sample : s.samples) {
        const auto e = mon.push(sample);
        if (!e) continue;
        if (e->step == s.onset + deadline) out.at_deadline = e;
        if (e->bus == 0 || seen) continue;
        seen = true;
        if (e->step < s.onset) {
            out.false_alarm = true;
            continue;
        }
        out.delay = e->step - s.onset;
        out.detected = out.delay <= deadline;
        out.kind = e->kind;
        out.bus = e->bus;
    }
    return out;
}

}  // namespace gridseer::gridml
