#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "gridseer/common/rng.hpp"

namespace gridseer::gridml {

struct WeatherSample {
    double irradiance = 0.0;    ///< W/m^2, clear-sky plane-of-array
    double ambient_temp = 25.0; ///< deg C
    double cloud_cover = 0.0;   ///< fraction [0, 1]
    int hour = 12;              ///< 0..23

    bool operator==(const WeatherSample&) const = default;
};

/// Synthetic site weather. Irradiance follows a clear-sky half-sine between
/// 06:00 and 18:00; cloud attenuation is applied by the power formula.
struct WeatherModel {
    double peak_irradiance = 1000.0;
    double sunrise = 6.0;
    double sunset = 18.0;
    double cloud_hourly_sigma = 0.10;
    double forecast_cloud_sigma = 0.20;
    double forecast_temp_sigma = 1.5;
    /// Actual-output noise, as a fraction of rating at full irradiance.
    double power_noise = 0.05;

    double clear_sky(int hour) const {
        const double h = static_cast<double>(hour);
        if (h <= sunrise || h >= sunset) return 0.0;
        return peak_irradiance * std::sin(std::numbers::pi * (h - sunrise) / (sunset - sunrise));
    }
};

inline double cell_temperature(const WeatherSample& w) { return w.ambient_temp + 0.03 * w.irradiance; }

/// Generative solar output formula, per-unit, clamped to [0, rated].
inline double solar_formula(const WeatherSample& w, double rated) {
    const double p = rated * (w.irradiance / 1000.0) * (1.0 - 0.004 * (cell_temperature(w) - 25.0)) *
                     (1.0 - 0.75 * w.cloud_cover);
    return std::clamp(p, 0.0, rated);
}

/// Daily weather regime: a cloudiness baseline and a temperature offset.
struct DayRegime {
    double cloud_base = 0.0;
    double temp_offset = 0.0;
};

inline DayRegime draw_day(std::uint64_t seed, std::size_t day) {
    Rng rng(derive_seed(seed, 0x646179ULL, day));
    return {rng.uniform(0.0, 0.7), rng.normal(0.0, 2.0)};
}

struct HourWeather {
    WeatherSample actual;
    WeatherSample forecast;  ///< day-ahead forecast of the same hour
};

inline HourWeather draw_hour(const WeatherModel& m, const DayRegime& day, std::uint64_t seed, std::size_t d,
                             int hour) {
    Rng rng(derive_seed(seed, 0x686f7572ULL, d, static_cast<std::uint64_t>(hour)));
    HourWeather w;
    w.actual.hour = hour;
    w.actual.irradiance = m.clear_sky(hour);
    w.actual.cloud_cover = std::clamp(day.cloud_base + m.cloud_hourly_sigma * rng.normal(), 0.0, 1.0);
    w.actual.ambient_temp =
        22.0 + 8.0 * std::sin(std::numbers::pi * (static_cast<double>(hour) - 9.0) / 12.0) + day.temp_offset;
    w.forecast = w.actual;
    w.forecast.cloud_cover = std::clamp(w.actual.cloud_cover + m.forecast_cloud_sigma * rng.normal(), 0.0, 1.0);
    w.forecast.ambient_temp = w.actual.ambient_temp + m.forecast_temp_sigma * rng.normal();
    return w;
}

/// Actual plant output: the formula plus Gaussian noise whose spread scales
/// with irradiance (no output, and no noise, at night).
inline double actual_solar_power(const WeatherModel& m, const WeatherSample& w, double rated, Rng& rng) {
    const double sigma = m.power_noise * rated * (w.irradiance / 1000.0);
    return std::clamp(solar_formula(w, rated) + sigma * rng.normal(), 0.0, rated);
}

/// Hourly load multiplier: base level with a midday and an evening peak.
inline double load_factor(int hour) {
    const double h = static_cast<double>(hour);
    return 0.70 + 0.22 * std::exp(-(h - 12.0) * (h - 12.0) / 18.0) + 0.12 * std::exp(-(h - 19.0) * (h - 19.0) / 4.0);
}

}  // namespace gridseer::gridml
