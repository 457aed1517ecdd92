#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "gridseer/dispatch/scenario.hpp"
#include "gridseer/gridml/weather.hpp"
#include "gridseer/nn/mlp.hpp"

namespace gridseer::gridml {

struct SolarSample {
    WeatherSample weather;
    double rated = 0.0;
    double power = 0.0;  ///< observed output, per-unit
};

inline constexpr Eigen::Index kSolarFeatures = 4;

inline nn::Vector solar_features(const WeatherSample& w) {
    nn::Vector f(kSolarFeatures);
    f << w.irradiance / 1000.0, w.ambient_temp / 40.0, w.cloud_cover, static_cast<double>(w.hour) / 23.0;
    return f;
}

/// One sample per (hour, solar generator) of the selected days, taken from
/// the mask-0 scenario of each hour (weather and output do not depend on the
/// mask).
inline std::vector<SolarSample> solar_samples(const dispatch::SubsetDataset& ds, const grid::GridState& g,
                                              const std::vector<std::size_t>& days) {
    const auto solar = g.solar_indices();
    std::vector<SolarSample> out;
    for (const auto& s : ds.scenarios) {
        if (s.mask.index() != 0 || std::find(days.begin(), days.end(), s.day) == days.end()) continue;
        if (s.actual_power.size() != solar.size()) throw ShapeMismatch("scenario solar count does not match grid");
        for (std::size_t k = 0; k < solar.size(); ++k)
            out.push_back({s.weather, g.generators[solar[k]].p_rated, s.actual_power[k]});
    }
    return out;
}

struct SolarConfig {
    std::size_t hidden = 32;
    std::size_t steps = 6000;
};

/// Dense 4 -> 32 (ReLU) -> 1 regression of output as a fraction of rating.
inline nn::ModelParams train_solar_model(const std::vector<SolarSample>& samples, std::uint64_t seed,
                                         const SolarConfig& cfg = {}) {
    if (samples.empty()) throw DegenerateData("no solar samples");
    nn::Tensor2 x(kSolarFeatures, static_cast<Eigen::Index>(samples.size()));
    nn::Tensor2 y(1, x.cols());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        x.col(c) = solar_features(samples[i].weather);
        y(0, c) = samples[i].rated > 0.0 ? samples[i].power / samples[i].rated : 0.0;
    }
    nn::MlpConfig mc;
    mc.hidden = cfg.hidden;
    mc.steps = cfg.steps;
    const nn::Mlp net = nn::train_mlp(x, y, mc, seed);
    nn::ModelParams m;
    m.kind = nn::ModelKind::SolarPower;
    net.store(m);
    m.metadata = {{"task", "solar"}, {"seed", seed}, {"steps", cfg.steps}, {"hidden", cfg.hidden},
                  {"samples", samples.size()}};
    return m;
}

inline double predict_solar_power(const nn::ModelParams& m, const WeatherSample& w, double rated) {
    if (m.kind != nn::ModelKind::SolarPower) throw ShapeMismatch("predict_solar_power needs a SolarPower model");
    const nn::Mlp net = nn::Mlp::from_model(m);
    if (net.stdz.mean.size() != kSolarFeatures) throw ShapeMismatch("solar model expects 4 weather features");
    const double frac = net.forward(solar_features(w))(0, 0);
    return std::clamp(frac * rated, 0.0, rated);
}

}  // namespace gridseer::gridml
