#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridseer/common/error.hpp"
#include "gridseer/common/parallel.hpp"
#include "gridseer/common/rng.hpp"
#include "gridseer/grid/io.hpp"
#include "gridseer/gridml/weather.hpp"
#include "gridseer/powerflow/congestion.hpp"
#include "gridseer/powerflow/newton.hpp"

namespace gridseer::dispatch {

inline constexpr double kCongestionPenalty = 50.0;
inline constexpr double kL1Range = 50.0;
inline constexpr std::size_t kMaxEnumerated = 20;

/// One bit per Solar generator, in GridState::solar_indices() order.
struct SubsetMask {
    std::vector<std::uint8_t> bits;

    bool operator==(const SubsetMask&) const = default;
    std::size_t size() const noexcept { return bits.size(); }
    std::size_t count_on() const {
        return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
    }
    /// Bit k of the index is generator k.
    std::uint64_t index() const {
        std::uint64_t m = 0;
        for (std::size_t k = 0; k < bits.size(); ++k)
            if (bits[k]) m |= std::uint64_t{1} << k;
        return m;
    }
    std::string str() const {
        std::string s;
        for (auto b : bits) s.push_back(b ? '1' : '0');
        return s;
    }
};

inline SubsetMask mask_from_index(std::uint64_t m, std::size_t n) {
    SubsetMask mask;
    mask.bits.resize(n);
    for (std::size_t k = 0; k < n; ++k) mask.bits[k] = static_cast<std::uint8_t>((m >> k) & 1U);
    return mask;
}

inline SubsetMask all_on(std::size_t n) { return {std::vector<std::uint8_t>(n, 1)}; }

struct PenaltyScaler {
    double l1_min = 0.0;
    double l1_max = 0.0;
    bool fitted = false;

    /// Min-max bounds of the raw penalties.
    static PenaltyScaler fit(const std::vector<double>& raw) {
        if (raw.empty()) throw DegenerateData("cannot fit penalty scaler on no data");
        const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
        if (!(*hi > *lo)) throw DegenerateData("raw L1 penalties are all identical");
        return {*lo, *hi, true};
    }

    double scale(double raw) const {
        if (!fitted) throw ScalerNotFitted("penalty scaler has not been fitted");
        const double t = (raw - l1_min) / (l1_max - l1_min);
        return std::clamp(t, 0.0, 1.0) * kL1Range;
    }
};

inline double compute_l1(double committed, double delivered, const PenaltyScaler& scaler) {
    return scaler.scale(std::abs(committed - delivered));
}

inline double compute_l2(bool congested) { return congested ? kCongestionPenalty : 0.0; }

/// Everything about one synthetic hour that does not depend on the mask.
struct HourContext {
    std::size_t day = 0;
    int hour = 0;
    gridml::HourWeather weather;
    std::vector<double> committed;  ///< per solar generator, day-ahead
    std::vector<double> actual;     ///< per solar generator, delivered if on
    grid::GridState grid;           ///< hourly loads, solar at actual output, all on
    std::vector<double> pre_voltages;
    grid::GridState warm;           ///< `grid` carrying the t=0+ solution
};

struct ScenarioOptions {
    gridml::WeatherModel weather;
    double load_noise = 0.02;
    double day_scale_spread = 0.05;
    powerflow::SolveOptions solve{1e-8, 30, true};
    unsigned threads = 0;
};

/// Hourly grid: loads follow the daily profile with a per-day scale and
/// per-bus noise; every solar unit is on and producing its actual output.
inline HourContext make_hour(const grid::GridState& base, std::uint64_t seed, std::size_t day, int hour,
                             const ScenarioOptions& opt = {}) {
    HourContext h;
    h.day = day;
    h.hour = hour;
    const auto regime = gridml::draw_day(seed, day);
    h.weather = gridml::draw_hour(opt.weather, regime, seed, day, hour);

    Rng day_rng(derive_seed(seed, 0x6c6f6164ULL, day));
    const double day_scale = 1.0 + day_rng.uniform(-opt.day_scale_spread, opt.day_scale_spread);
    Rng rng(derive_seed(seed, 0x627573ULL, day, static_cast<std::uint64_t>(hour)));

    h.grid = base;
    const double f = gridml::load_factor(hour) * day_scale;
    for (auto& b : h.grid.buses) {
        const double m = f * (1.0 + rng.uniform(-opt.load_noise, opt.load_noise));
        b.p_load *= m;
        b.q_load *= m;
    }
    for (std::size_t k : base.solar_indices()) {
        auto& gen = h.grid.generators[k];
        const double c = gridml::solar_formula(h.weather.forecast, gen.p_rated);
        const double a = gridml::actual_solar_power(opt.weather, h.weather.actual, gen.p_rated, rng);
        h.committed.push_back(c);
        h.actual.push_back(a);
        gen.on = true;
        gen.p_set = a;
    }
    const auto sol = powerflow::solve_powerflow(h.grid, opt.solve);
    h.pre_voltages = sol.v_mag;
    h.warm = powerflow::with_voltages(h.grid, sol);
    return h;
}

struct MaskOutcome {
    double committed_total = 0.0;
    double actual_total = 0.0;
    double l1_raw = 0.0;
    bool congested = false;
    bool converged = true;
};

/// Switches the off-subset out at t=1 and re-solves from the t=0+ state.
inline MaskOutcome simulate_mask(const HourContext& h, const SubsetMask& mask, const ScenarioOptions& opt = {}) {
    const auto solar = h.grid.solar_indices();
    if (mask.size() != solar.size()) throw ShapeMismatch("mask length does not match solar generator count");
    MaskOutcome out;
    grid::GridState g = h.warm;
    for (std::size_t k = 0; k < solar.size(); ++k) {
        g.generators[solar[k]].on = mask.bits[k] != 0;
        if (mask.bits[k]) {
            out.committed_total += h.committed[k];
            out.actual_total += h.actual[k];
        }
    }
    out.l1_raw = std::abs(out.committed_total - out.actual_total);
    try {
        const auto sol = powerflow::solve_powerflow(g, opt.solve);
        out.congested = powerflow::check_congestion(sol, g).congested;
    } catch (const NonConvergence&) {
        out.converged = false;
    } catch (const SingularJacobian&) {
        out.converged = false;
    }
    return out;
}

struct SubsetScenario {
    std::size_t day = 0;
    int hour = 0;
    std::vector<double> pre_voltages;
    SubsetMask mask;
    gridml::WeatherSample weather;
    gridml::WeatherSample forecast;
    std::vector<double> committed_power;
    std::vector<double> actual_power;
    std::vector<double> p_load;
    std::vector<double> q_load;
    double committed_total = 0.0;
    double actual_total = 0.0;
    double l1_raw = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    double total = 0.0;
    bool congested = false;
    bool converged = true;
};

inline SubsetScenario make_scenario(const HourContext& h, const SubsetMask& mask, const MaskOutcome& o,
                                    const PenaltyScaler& scaler) {
    SubsetScenario s;
    s.day = h.day;
    s.hour = h.hour;
    s.pre_voltages = h.pre_voltages;
    s.mask = mask;
    s.weather = h.weather.actual;
    s.forecast = h.weather.forecast;
    s.committed_power = h.committed;
    s.actual_power = h.actual;
    for (const auto& b : h.grid.buses) {
        s.p_load.push_back(b.p_load);
        s.q_load.push_back(b.q_load);
    }
    s.committed_total = o.committed_total;
    s.actual_total = o.actual_total;
    s.l1_raw = o.l1_raw;
    s.l1 = scaler.scale(o.l1_raw);
    s.congested = o.congested || !o.converged;
    s.converged = o.converged;
    s.l2 = compute_l2(s.congested);
    s.total = s.l1 + s.l2;
    return s;
}

/// Rebuilds the hour a stored scenario came from, so it can be re-simulated.
inline HourContext hour_from_scenario(const grid::GridState& base, const SubsetScenario& s,
                                      const ScenarioOptions& opt = {}) {
    HourContext h;
    h.day = s.day;
    h.hour = s.hour;
    h.weather = {s.weather, s.forecast};
    h.committed = s.committed_power;
    h.actual = s.actual_power;
    h.grid = base;
    if (s.p_load.size() != base.bus_count() || s.q_load.size() != base.bus_count())
        throw ShapeMismatch("scenario load profile does not match the grid");
    for (std::size_t i = 0; i < base.bus_count(); ++i) {
        h.grid.buses[i].p_load = s.p_load[i];
        h.grid.buses[i].q_load = s.q_load[i];
    }
    const auto solar = base.solar_indices();
    if (s.actual_power.size() != solar.size()) throw ShapeMismatch("scenario solar count does not match the grid");
    for (std::size_t k = 0; k < solar.size(); ++k) {
        h.grid.generators[solar[k]].on = true;
        h.grid.generators[solar[k]].p_set = s.actual_power[k];
    }
    const auto sol = powerflow::solve_powerflow(h.grid, opt.solve);
    h.pre_voltages = sol.v_mag;
    h.warm = powerflow::with_voltages(h.grid, sol);
    return h;
}

/// An hour given by its weather and per-generator power, with the loads of
/// `base` as they stand.
inline HourContext hour_from_weather(const grid::GridState& base, const gridml::HourWeather& weather,
                                     std::span<const double> committed, std::span<const double> actual,
                                     const ScenarioOptions& opt = {}) {
    SubsetScenario s;
    s.hour = weather.actual.hour;
    s.weather = weather.actual;
    s.forecast = weather.forecast;
    s.committed_power.assign(committed.begin(), committed.end());
    s.actual_power.assign(actual.begin(), actual.end());
    if (s.committed_power.size() != s.actual_power.size())
        throw ShapeMismatch("committed and actual power differ in length");
    for (const auto& b : base.buses) {
        s.p_load.push_back(b.p_load);
        s.q_load.push_back(b.q_load);
    }
    return hour_from_scenario(base, s, opt);
}

struct DaySplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;

    bool is_test(std::size_t day) const { return std::find(test.begin(), test.end(), day) != test.end(); }
};

/// Seeded 80/20 split of whole days.
inline DaySplit split_days(std::size_t days, std::uint64_t seed) {
    std::vector<std::size_t> idx(days);
    for (std::size_t d = 0; d < days; ++d) idx[d] = d;
    Rng rng(derive_seed(seed, 0x73706c6974ULL));
    rng.shuffle(idx);
    std::size_t n_test = days >= 2 ? static_cast<std::size_t>(std::lround(0.2 * static_cast<double>(days))) : 0;
    n_test = std::clamp<std::size_t>(n_test, days >= 2 ? 1 : 0, days >= 2 ? days - 1 : 0);
    DaySplit s;
    s.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
    std::sort(s.test.begin(), s.test.end());
    std::sort(s.train.begin(), s.train.end());
    return s;
}

struct SubsetDataset {
    std::uint64_t seed = 0;
    std::size_t days = 0;
    std::string grid_hash;
    PenaltyScaler scaler;
    DaySplit split;
    std::vector<SubsetScenario> scenarios;  ///< day, hour, mask index order
};

/// Every day x hour x mask. The L1 scaler is fitted on the training days.
inline SubsetDataset gen_subset_scenarios(const grid::GridState& g, std::size_t days, std::uint64_t seed,
                                          const ScenarioOptions& opt = {}) {
    const std::size_t n_solar = g.solar_indices().size();
    if (n_solar < 1) throw ValidationError("grid has no Solar generators");
    if (n_solar > kMaxEnumerated) throw TooManyGenerators("too many Solar generators to enumerate");
    if (days < 1) throw ValidationError("days must be >= 1");
    const std::size_t n_mask = std::size_t{1} << n_solar;
    const std::size_t hours = days * 24;

    std::vector<HourContext> ctx(hours);
    parallel_for(
        hours, [&](std::size_t i) { ctx[i] = make_hour(g, seed, i / 24, static_cast<int>(i % 24), opt); },
        opt.threads);

    std::vector<MaskOutcome> outcomes(hours * n_mask);
    parallel_for(
        outcomes.size(),
        [&](std::size_t i) {
            outcomes[i] = simulate_mask(ctx[i / n_mask], mask_from_index(i % n_mask, n_solar), opt);
        },
        opt.threads);

    SubsetDataset ds;
    ds.seed = seed;
    ds.days = days;
    ds.grid_hash = grid::grid_hash(g);
    ds.split = split_days(days, seed);
    std::vector<double> raw;
    for (std::size_t i = 0; i < outcomes.size(); ++i)
        if (!ds.split.is_test(ctx[i / n_mask].day)) raw.push_back(outcomes[i].l1_raw);
    ds.scaler = PenaltyScaler::fit(raw);

    ds.scenarios.reserve(outcomes.size());
    for (std::size_t i = 0; i < outcomes.size(); ++i)
        ds.scenarios.push_back(
            make_scenario(ctx[i / n_mask], mask_from_index(i % n_mask, n_solar), outcomes[i], ds.scaler));
    return ds;
}

}  // namespace gridseer::dispatch
