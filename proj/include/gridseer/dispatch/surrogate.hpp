#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "gridseer/common/parallel.hpp"
#include "gridseer/dispatch/scenario.hpp"
#include "gridseer/nn/mlp.hpp"

namespace gridseer::dispatch {

inline nn::Vector surrogate_input(std::span<const double> pre_voltages, const SubsetMask& mask) {
    nn::Vector x(static_cast<Eigen::Index>(pre_voltages.size() + mask.size()));
    for (std::size_t i = 0; i < pre_voltages.size(); ++i) x(static_cast<Eigen::Index>(i)) = pre_voltages[i];
    for (std::size_t k = 0; k < mask.size(); ++k)
        x(static_cast<Eigen::Index>(pre_voltages.size() + k)) = mask.bits[k] ? 1.0 : 0.0;
    return x;
}

struct SurrogateConfig {
    std::size_t hidden = 200;
    std::size_t steps = 2500;
    std::size_t batch = 32;
    std::size_t eval_every = 50;
    nn::AdamConfig adam;
};

struct LossPoint {
    std::size_t step = 0;
    double train_loss = 0.0;
    double test_loss = 0.0;
};

/// Mean squared errors in penalty-points², split by whether the scenario
/// carries the congestion penalty.
struct LossBreakdown {
    double total = 0.0;
    double l1_like = 0.0;  ///< scenarios with l2 == 0
    double l2_like = 0.0;  ///< scenarios with l2 == 50
    std::size_t n_l1 = 0;
    std::size_t n_l2 = 0;
};

struct SurrogateResult {
    nn::ModelParams model;
    std::vector<LossPoint> curve;
    LossBreakdown train;
    LossBreakdown test;
};

namespace detail {

inline void surrogate_matrix(const std::vector<const SubsetScenario*>& s, nn::Tensor2& x, nn::Tensor2& y) {
    const std::size_t d = s.front()->pre_voltages.size() + s.front()->mask.size();
    x.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(s.size()));
    y.resize(1, x.cols());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const nn::Vector v = surrogate_input(s[i]->pre_voltages, s[i]->mask);
        if (static_cast<std::size_t>(v.size()) != d) throw ShapeMismatch("scenarios differ in input size");
        x.col(static_cast<Eigen::Index>(i)) = v;
        y(0, static_cast<Eigen::Index>(i)) = s[i]->total;
    }
}

inline LossBreakdown breakdown(const nn::Mlp& net, const std::vector<const SubsetScenario*>& s, const nn::Tensor2& x,
                               const nn::Tensor2& y) {
    LossBreakdown b;
    if (s.empty()) return b;
    const nn::Tensor2 p = net.forward(x);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        const double e = (p(0, c) - y(0, c)) * (p(0, c) - y(0, c));
        if (s[i]->l2 > 0.0) {
            s2 += e;
            ++b.n_l2;
        } else {
            s1 += e;
            ++b.n_l1;
        }
    }
    b.total = (s1 + s2) / static_cast<double>(s.size());
    b.l1_like = b.n_l1 ? s1 / static_cast<double>(b.n_l1) : 0.0;
    b.l2_like = b.n_l2 ? s2 / static_cast<double>(b.n_l2) : 0.0;
    return b;
}

}  // namespace detail

/// Fits (pre_voltages ++ mask) -> l1 + l2 by squared error on the dataset's
/// training days; the held-out days give the test loss.
inline SurrogateResult train_surrogate(const SubsetDataset& ds, std::uint64_t seed, const SurrogateConfig& cfg = {}) {
    if (ds.scenarios.size() < 100) throw ValidationError("train_surrogate needs at least 100 scenarios");
    const double t0 = ds.scenarios.front().total;
    if (std::all_of(ds.scenarios.begin(), ds.scenarios.end(), [t0](const auto& s) { return s.total == t0; }))
        throw DegenerateData("all scenario totals are identical");

    std::vector<const SubsetScenario*> train, test;
    for (const auto& s : ds.scenarios) (ds.split.is_test(s.day) ? test : train).push_back(&s);
    if (train.empty()) throw ValidationError("no training days");
    nn::Tensor2 xtr, ytr, xte, yte;
    detail::surrogate_matrix(train, xtr, ytr);
    if (!test.empty()) detail::surrogate_matrix(test, xte, yte);

    nn::MlpConfig mc;
    mc.hidden = cfg.hidden;
    mc.steps = cfg.steps;
    mc.batch = cfg.batch;
    mc.target_scale = kCongestionPenalty;
    mc.adam = cfg.adam;
    mc.eval_every = cfg.eval_every;
    SurrogateResult r;
    const nn::Mlp net = nn::train_mlp(xtr, ytr, mc, seed, [&](std::size_t step, const nn::Mlp& n, double loss) {
        r.curve.push_back({step, loss, test.empty() ? 0.0 : detail::breakdown(n, test, xte, yte).total});
    });
    r.train = detail::breakdown(net, train, xtr, ytr);
    if (!test.empty()) r.test = detail::breakdown(net, test, xte, yte);
    r.model.kind = nn::ModelKind::SubsetSurrogate;
    net.store(r.model);
    r.model.metadata = {{"task", "surrogate"},
                        {"seed", seed},
                        {"steps", cfg.steps},
                        {"hidden", cfg.hidden},
                        {"batch", cfg.batch},
                        {"buses", xtr.rows() - static_cast<Eigen::Index>(train.front()->mask.size())},
                        {"n_solar", train.front()->mask.size()},
                        {"dataset_seed", ds.seed},
                        {"grid_hash", ds.grid_hash},
                        {"l1_min", ds.scaler.l1_min},
                        {"l1_max", ds.scaler.l1_max}};
    return r;
}

inline std::string loss_curve_csv(const std::vector<LossPoint>& curve) {
    std::ostringstream os;
    os.precision(10);
    os << "step,train_loss,test_loss\n";
    for (const auto& p : curve) os << p.step << ',' << p.train_loss << ',' << p.test_loss << '\n';
    return os.str();
}

struct Selection {
    SubsetMask mask;
    double predicted = 0.0;
    std::size_t evaluations = 0;
};

namespace detail {

/// Strict preference used by both selectors: lower score, then more
/// generators on, then lexicographically smaller bit string.
inline bool better(double sa, const SubsetMask& a, double sb, const SubsetMask& b) {
    if (sa != sb) return sa < sb;
    if (a.count_on() != b.count_on()) return a.count_on() > b.count_on();
    return a.bits < b.bits;
}

}  // namespace detail

/// Scores every mask with `score(mask)` and returns the preferred one.
template <class Score>
Selection select_by_score(std::size_t n_solar, Score&& score) {
    if (n_solar > kMaxEnumerated) throw TooManyGenerators("at most 20 Solar generators can be enumerated");
    if (n_solar < 1) throw ValidationError("n_solar must be >= 1");
    Selection best;
    const std::uint64_t n_mask = std::uint64_t{1} << n_solar;
    for (std::uint64_t m = 0; m < n_mask; ++m) {
        const SubsetMask mask = mask_from_index(m, n_solar);
        const double s = score(mask);
        ++best.evaluations;
        if (m == 0 || detail::better(s, mask, best.predicted, best.mask)) best = {mask, s, best.evaluations};
    }
    return best;
}

inline Selection select_optimal_subset(const nn::ModelParams& model, std::span<const double> pre_voltages,
                                       std::size_t n_solar) {
    if (n_solar > kMaxEnumerated) throw TooManyGenerators("at most 20 Solar generators can be enumerated");
    if (model.kind != nn::ModelKind::SubsetSurrogate) throw ShapeMismatch("select needs a SubsetSurrogate model");
    const nn::Mlp net = nn::Mlp::from_model(model);
    if (static_cast<std::size_t>(net.stdz.mean.size()) != pre_voltages.size() + n_solar)
        throw ShapeMismatch("surrogate input size does not match voltages + mask bits");
    return select_by_score(n_solar, [&](const SubsetMask& m) {
        return net.forward(surrogate_input(pre_voltages, m))(0, 0);
    });
}

struct RankedMask {
    SubsetMask mask;
    double total = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    bool congested = false;
    bool converged = true;
};

/// Simulates every mask of the hour and ranks them by true total penalty
/// (same preference order as the selectors).
inline std::vector<RankedMask> brute_force_best_subset(const HourContext& h, const PenaltyScaler& scaler,
                                                       const ScenarioOptions& opt = {}) {
    const std::size_t n = h.committed.size();
    if (n > kMaxEnumerated) throw TooManyGenerators("at most 20 Solar generators can be enumerated");
    const std::size_t n_mask = std::size_t{1} << n;
    std::vector<RankedMask> out(n_mask);
    parallel_for(
        n_mask,
        [&](std::size_t m) {
            const SubsetMask mask = mask_from_index(m, n);
            const SubsetScenario s = make_scenario(h, mask, simulate_mask(h, mask, opt), scaler);
            out[m] = {mask, s.total, s.l1, s.l2, s.congested, s.converged};
        },
        opt.threads);
    std::sort(out.begin(), out.end(),
              [](const RankedMask& a, const RankedMask& b) { return detail::better(a.total, a.mask, b.total, b.mask); });
    return out;
}

inline std::vector<RankedMask> brute_force_best_subset(const grid::GridState& g, const gridml::HourWeather& weather,
                                                       std::span<const double> committed,
                                                       std::span<const double> actual, const PenaltyScaler& scaler,
                                                       const ScenarioOptions& opt = {}) {
    return brute_force_best_subset(hour_from_weather(g, weather, committed, actual, opt), scaler, opt);
}

struct HourSelection {
    std::size_t day = 0;
    int hour = 0;
    SubsetMask chosen;
    double predicted = 0.0;
    double chosen_true = 0.0;
    double optimum = 0.0;
    bool within = false;
};

struct SelectionReport {
    std::vector<HourSelection> hours;
    double fraction_within = 0.0;
};

/// Joins the surrogate's choice with the oracle ranking on every test hour of
/// the dataset. A choice counts when its true total is within `tolerance`
/// (relative) of the optimum.
inline SelectionReport evaluate_selection(const nn::ModelParams& model, const SubsetDataset& ds,
                                          const grid::GridState& g, double tolerance = 0.10,
                                          const ScenarioOptions& opt = {}) {
    SelectionReport r;
    std::size_t hit = 0;
    for (const auto& s : ds.scenarios) {
        if (s.mask.index() != 0 || !ds.split.is_test(s.day)) continue;
        const HourContext h = hour_from_scenario(g, s, opt);
        const auto ranking = brute_force_best_subset(h, ds.scaler, opt);
        const Selection sel = select_optimal_subset(model, s.pre_voltages, s.mask.size());
        HourSelection hs{s.day, s.hour, sel.mask, sel.predicted, 0.0, ranking.front().total, false};
        for (const auto& rm : ranking)
            if (rm.mask == sel.mask) hs.chosen_true = rm.total;
        hs.within = hs.chosen_true <= (1.0 + tolerance) * hs.optimum + 1e-12;
        hit += hs.within;
        r.hours.push_back(std::move(hs));
    }
    r.fraction_within = r.hours.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(r.hours.size());
    return r;
}

}  // namespace gridseer::dispatch
