#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "gridseer/common/error.hpp"

namespace gridseer::grid {

enum class BusKind { Slack, PV, PQ };
enum class GenKind { Solar, Conventional };

inline std::string_view to_string(BusKind k) {
    switch (k) {
        case BusKind::Slack: return "Slack";
        case BusKind::PV: return "PV";
        case BusKind::PQ: return "PQ";
    }
    return "?";
}

inline std::string_view to_string(GenKind k) {
    return k == GenKind::Solar ? "Solar" : "Conventional";
}

/// Per-unit bus record. For Slack and PV buses `v_mag` is the voltage
/// setpoint; for PQ buses `v_mag`/`v_ang` are only a starting guess.
struct Bus {
    int id = 0;
    BusKind kind = BusKind::PQ;
    double v_mag = 1.0;
    double v_ang = 0.0;
    double p_load = 0.0;
    double q_load = 0.0;
    double base_kv = 230.0;

    bool operator==(const Bus&) const = default;
};

/// pi-model line. `b_shunt` is the total charging susceptance, split half at
/// each end.
struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;
    double x = 0.0;
    double b_shunt = 0.0;
    double mva_limit = 1.0;
    bool in_service = true;

    bool operator==(const Branch&) const = default;
};

struct Generator {
    int bus_id = 0;
    GenKind kind = GenKind::Conventional;
    double p_rated = 0.0;
    double p_set = 0.0;
    double q_min = 0.0;
    double q_max = 0.0;
    double cost_per_pu = 0.0;
    bool on = true;

    bool operator==(const Generator&) const = default;
};

/// The network in per-unit on `base_mva`. Buses are stored in id order, so
/// bus id `k` lives at index `k - 1`.
struct GridState {
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;

    bool operator==(const GridState&) const = default;

    std::size_t bus_count() const noexcept { return buses.size(); }

    std::size_t slack_index() const {
        for (std::size_t i = 0; i < buses.size(); ++i)
            if (buses[i].kind == BusKind::Slack) return i;
        throw ValidationError("grid has no Slack bus");
    }

    /// Indices into `generators` of the Solar units, in list order. This order
    /// defines the bit order of subset masks.
    std::vector<std::size_t> solar_indices() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < generators.size(); ++i)
            if (generators[i].kind == GenKind::Solar) out.push_back(i);
        return out;
    }

    double total_load() const noexcept {
        double s = 0.0;
        for (const auto& b : buses) s += b.p_load;
        return s;
    }

    double total_rated_generation() const noexcept {
        double s = 0.0;
        for (const auto& g : generators) s += g.p_rated;
        return s;
    }
};

namespace detail {

inline bool finite_all(std::initializer_list<double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace detail

/// Throws ValidationError naming the first violated rule.
inline void validate(const GridState& g) {
    auto fail = [](const std::string& msg) { throw ValidationError(msg); };

    if (!(std::isfinite(g.base_mva) && g.base_mva > 0.0)) fail("base_mva must be positive");
    if (g.buses.empty()) fail("grid has no buses");

    const int n = static_cast<int>(g.buses.size());
    int slack_count = 0;
    for (int i = 0; i < n; ++i) {
        const Bus& b = g.buses[static_cast<std::size_t>(i)];
        if (b.id != i + 1)
            fail("bus ids must be unique and contiguous 1..N (position " + std::to_string(i + 1) +
                 " holds id " + std::to_string(b.id) + ")");
        if (!detail::finite_all({b.v_mag, b.v_ang, b.p_load, b.q_load, b.base_kv}))
            fail("bus " + std::to_string(b.id) + " has a non-finite field");
        if (!(b.v_mag > 0.0)) fail("bus " + std::to_string(b.id) + " must have v_mag > 0");
        if (b.kind == BusKind::Slack) ++slack_count;
    }
    if (slack_count != 1)
        fail("exactly one Slack bus required, found " + std::to_string(slack_count));

    auto known = [n](int id) { return id >= 1 && id <= n; };
    for (std::size_t k = 0; k < g.branches.size(); ++k) {
        const Branch& br = g.branches[k];
        const std::string tag = "branch " + std::to_string(k);
        if (!known(br.from_bus) || !known(br.to_bus))
            fail(tag + " references a missing bus (" + std::to_string(br.from_bus) + "-" +
                 std::to_string(br.to_bus) + ")");
        if (br.from_bus == br.to_bus) fail(tag + " connects a bus to itself");
        if (!detail::finite_all({br.r, br.x, br.b_shunt, br.mva_limit}))
            fail(tag + " has a non-finite field");
        if (br.x == 0.0) fail(tag + " has zero reactance");
        if (br.r < 0.0) fail(tag + " has negative resistance");
        if (!(br.mva_limit > 0.0)) fail(tag + " must have mva_limit > 0");
    }

    const int slack_id = static_cast<int>(g.slack_index()) + 1;
    bool slack_conventional = false;
    for (std::size_t k = 0; k < g.generators.size(); ++k) {
        const Generator& gen = g.generators[k];
        const std::string tag = "generator " + std::to_string(k);
        if (!known(gen.bus_id)) fail(tag + " references a missing bus " + std::to_string(gen.bus_id));
        if (!detail::finite_all({gen.p_rated, gen.p_set, gen.q_min, gen.q_max, gen.cost_per_pu}))
            fail(tag + " has a non-finite field");
        if (!(gen.p_set >= 0.0 && gen.p_set <= gen.p_rated))
            fail(tag + " must satisfy 0 <= p_set <= p_rated");
        if (!(gen.q_min <= gen.q_max)) fail(tag + " must satisfy q_min <= q_max");
        if (gen.kind == GenKind::Conventional && gen.bus_id == slack_id) slack_conventional = true;
    }
    if (!slack_conventional) fail("at least one Conventional generator required at the slack bus");
}

}  // namespace gridseer::grid
