#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "gridseer/dispatch/scenario.hpp"
#include "gridseer/gridml/solar.hpp"
#include "gridseer/nn/mlp.hpp"
#include "gridseer/nn/svm.hpp"

namespace gridseer::gridml {

enum class PowerMode { KnownPower, PredictedPower };

inline std::string_view to_string(PowerMode m) {
    return m == PowerMode::KnownPower ? "KnownPower" : "PredictedPower";
}

/// Solar entries are zero for generators outside the on-subset.
struct CongestionSample {
    std::size_t day = 0;
    int hour = 0;
    std::vector<double> committed_solar;
    std::vector<double> actual_or_predicted_solar;
    std::vector<double> load_profile;
    bool congested = false;
};

/// Per-generator committed and (actual|predicted) power, total load, hour.
inline nn::Vector congestion_features(const CongestionSample& s) {
    const std::size_t n = s.committed_solar.size();
    if (s.actual_or_predicted_solar.size() != n) throw ShapeMismatch("solar vectors differ in length");
    nn::Vector f(static_cast<Eigen::Index>(2 * n + 2));
    double load = 0.0;
    for (double p : s.load_profile) load += p;
    for (std::size_t k = 0; k < n; ++k) {
        f(static_cast<Eigen::Index>(k)) = s.committed_solar[k];
        f(static_cast<Eigen::Index>(n + k)) = s.actual_or_predicted_solar[k];
    }
    f(static_cast<Eigen::Index>(2 * n)) = load;
    f(static_cast<Eigen::Index>(2 * n + 1)) = static_cast<double>(s.hour);
    return f;
}

/// Samples from scenarios; in PredictedPower mode the per-generator power is
/// the solar model's prediction from the hour's weather.
inline std::vector<CongestionSample> congestion_samples(const dispatch::SubsetDataset& ds, const grid::GridState& g,
                                                        PowerMode mode, const nn::ModelParams* solar_model = nullptr) {
    if (mode == PowerMode::PredictedPower && !solar_model)
        throw ValidationError("PredictedPower mode needs a solar model");
    const auto solar = g.solar_indices();
    std::vector<CongestionSample> out;
    out.reserve(ds.scenarios.size());
    std::vector<double> predicted(solar.size());
    int cached_hour = -1;
    std::size_t cached_day = 0;
    for (const auto& s : ds.scenarios) {
        if (s.mask.size() != solar.size() || s.p_load.size() != g.bus_count())
            throw ShapeMismatch("scenario does not match the grid");
        if (mode == PowerMode::PredictedPower && (s.hour != cached_hour || s.day != cached_day)) {
            for (std::size_t k = 0; k < solar.size(); ++k)
                predicted[k] = predict_solar_power(*solar_model, s.weather, g.generators[solar[k]].p_rated);
            cached_hour = s.hour;
            cached_day = s.day;
        }
        CongestionSample c;
        c.day = s.day;
        c.hour = s.hour;
        c.load_profile = s.p_load;
        c.congested = s.congested;
        for (std::size_t k = 0; k < solar.size(); ++k) {
            const double on = s.mask.bits[k] ? 1.0 : 0.0;
            c.committed_solar.push_back(on * s.committed_power[k]);
            c.actual_or_predicted_solar.push_back(on *
                                                  (mode == PowerMode::KnownPower ? s.actual_power[k] : predicted[k]));
        }
        out.push_back(std::move(c));
    }
    return out;
}

struct CongestionConfig {
    std::size_t hidden = 32;
    std::size_t steps = 8000;
};

inline nn::Tensor2 feature_matrix(const std::vector<CongestionSample>& samples) {
    if (samples.empty()) throw DegenerateLabels("no congestion samples");
    const nn::Vector f0 = congestion_features(samples[0]);
    nn::Tensor2 x(f0.size(), static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = congestion_features(samples[i]);
    return x;
}

/// Dense net, one hidden layer of 32 ReLU units, sigmoid output trained on
/// binary cross-entropy.
inline nn::ModelParams train_congestion_model(const std::vector<CongestionSample>& samples, PowerMode mode,
                                              std::uint64_t seed, const CongestionConfig& cfg = {}) {
    const nn::Tensor2 x = feature_matrix(samples);
    nn::Tensor2 y(1, x.cols());
    std::size_t pos = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        y(0, static_cast<Eigen::Index>(i)) = samples[i].congested ? 1.0 : 0.0;
        pos += samples[i].congested;
    }
    if (pos == 0 || pos == samples.size()) throw DegenerateLabels("congestion labels contain a single class");
    nn::MlpConfig mc;
    mc.hidden = cfg.hidden;
    mc.loss = nn::MlpLoss::SigmoidBce;
    mc.steps = cfg.steps;
    const nn::Mlp net = nn::train_mlp(x, y, mc, seed);
    nn::ModelParams m;
    m.kind = nn::ModelKind::Congestion;
    net.store(m);
    m.metadata = {{"task", "congestion"}, {"mode", std::string(to_string(mode))}, {"seed", seed},
                  {"steps", cfg.steps}, {"hidden", cfg.hidden}, {"samples", samples.size()}};
    return m;
}

inline double predict_congestion(const nn::ModelParams& m, const CongestionSample& s) {
    if (m.kind != nn::ModelKind::Congestion) throw ShapeMismatch("predict_congestion needs a Congestion model");
    const nn::Mlp net = nn::Mlp::from_model(m);
    const nn::Vector f = congestion_features(s);
    if (f.size() != net.stdz.mean.size()) throw ShapeMismatch("congestion feature count does not match the model");
    return net.forward(f)(0, 0);
}

inline std::vector<double> predict_congestion(const nn::ModelParams& m, const std::vector<CongestionSample>& s) {
    const nn::Mlp net = nn::Mlp::from_model(m);
    const nn::Tensor2 x = feature_matrix(s);
    if (x.rows() != net.stdz.mean.size()) throw ShapeMismatch("congestion feature count does not match the model");
    const nn::Tensor2 p = net.forward(x);
    return {p.data(), p.data() + p.size()};
}

inline double congestion_accuracy(const nn::ModelParams& m, const std::vector<CongestionSample>& s) {
    if (s.empty()) return 0.0;
    const auto p = predict_congestion(m, s);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < s.size(); ++i) hit += (p[i] >= 0.5) == s[i].congested;
    return static_cast<double>(hit) / static_cast<double>(s.size());
}

inline std::pair<std::vector<CongestionSample>, std::vector<CongestionSample>> split_by_day(
    const std::vector<CongestionSample>& s, const dispatch::DaySplit& split) {
    std::pair<std::vector<CongestionSample>, std::vector<CongestionSample>> out;
    for (const auto& c : s) (split.is_test(c.day) ? out.second : out.first).push_back(c);
    return out;
}

struct CongestionExperiment {
    nn::ModelParams model;
    std::optional<nn::ModelParams> solar_model;
    double train_acc = 0.0;
    double test_acc = 0.0;
    double svm_test_acc = 0.0;
    std::size_t train_samples = 0;
    std::size_t test_samples = 0;
};

/// Trains on the dataset's training days and scores the held-out days. In
/// PredictedPower mode the solar model is also fitted on training days only.
inline CongestionExperiment run_congestion_experiment(const dispatch::SubsetDataset& ds, const grid::GridState& g,
                                                      PowerMode mode, std::uint64_t seed,
                                                      const CongestionConfig& cfg = {}) {
    CongestionExperiment r;
    if (mode == PowerMode::PredictedPower)
        r.solar_model = train_solar_model(solar_samples(ds, g, ds.split.train), derive_seed(seed, 0x736f6c6172ULL));
    const auto all = congestion_samples(ds, g, mode, r.solar_model ? &*r.solar_model : nullptr);
    const auto [train, test] = split_by_day(all, ds.split);
    r.model = train_congestion_model(train, mode, seed, cfg);
    r.train_acc = congestion_accuracy(r.model, train);
    r.test_acc = congestion_accuracy(r.model, test);
    r.train_samples = train.size();
    r.test_samples = test.size();

    std::vector<int> y;
    for (const auto& c : train) y.push_back(c.congested ? 1 : 0);
    const auto svm = nn::svm_train(feature_matrix(train), y, derive_seed(seed, 0x73766dULL));
    if (!test.empty()) {
        const auto pred = nn::svm_predict(svm, feature_matrix(test));
        std::size_t hit = 0;
        for (std::size_t i = 0; i < test.size(); ++i) hit += (pred[i] == 1) == test[i].congested;
        r.svm_test_acc = static_cast<double>(hit) / static_cast<double>(test.size());
    }
    return r;
}

}  // namespace gridseer::gridml
