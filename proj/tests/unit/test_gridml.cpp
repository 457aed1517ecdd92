#include <gtest/gtest.h>

#include <map>
#include <set>

#include "gridseer/dispatch/scenario.hpp"
#include "gridseer/faultsim/dataset.hpp"
#include "gridseer/grid/default_grid.hpp"
#include "gridseer/gridml/congestion.hpp"
#include "gridseer/gridml/fault_models.hpp"
#include "gridseer/gridml/metrics.hpp"
#include "gridseer/gridml/monitor.hpp"
#include "gridseer/gridml/solar.hpp"
#include "gridseer/gridml/split.hpp"
#include "gridseer/gridml/weather.hpp"

using namespace gridseer;
using namespace gridseer::gridml;
using faultsim::FaultKind;

namespace {

const faultsim::FaultDataset& small_faults() {
    static const auto ds = faultsim::gen_fault_dataset(grid::build_default_grid(), 2, 42);
    return ds;
}

FaultModelConfig tiny_config() {
    FaultModelConfig cfg;
    cfg.seq.lstm_hidden = 8;
    cfg.seq.dense_hidden = 8;
    cfg.seq.epochs = 2;
    cfg.nofault_per_locator = 40;
    return cfg;
}

const TrainedClassifier& tiny_type_model() {
    static const auto m = train_fault_type_model(small_faults(), tiny_config(), 1);
    return m;
}

const dispatch::SubsetDataset& four_days() {
    static const auto ds = dispatch::gen_subset_scenarios(grid::build_default_grid(), 4, 42);
    return ds;
}

}  // namespace

TEST(Metrics, EchoPredictorIsPerfect) {
    const std::vector<int> y{0, 1, 2, 3, 3, 1};
    const auto m = compute_metrics(y, y, 4);
    EXPECT_EQ(m.accuracy, 1.0);
    for (double r : m.recall) EXPECT_EQ(r, 1.0);
}

TEST(Metrics, ConstantPredictorOnBalancedSet) {
    std::vector<int> y, p;
    for (int c = 0; c < 4; ++c)
        for (int i = 0; i < 5; ++i) {
            y.push_back(c);
            p.push_back(2);
        }
    const auto m = compute_metrics(y, p, 4);
    EXPECT_DOUBLE_EQ(m.accuracy, 0.25);
    for (std::size_t c = 0; c < 4; ++c) {
        std::size_t row = 0;
        for (auto v : m.confusion[c]) row += v;
        EXPECT_EQ(row, m.support[c]);
        EXPECT_EQ(m.support[c], 5u);
    }
    EXPECT_DOUBLE_EQ(m.precision[2], 0.25);
    EXPECT_EQ(m.recall[2], 1.0);
    EXPECT_EQ(m.precision[0], 0.0);
    EXPECT_THROW(compute_metrics(y, std::vector<int>(3, 0), 4), ShapeMismatch);
    EXPECT_THROW(compute_metrics(std::vector<int>{5}, std::vector<int>{0}, 4), ShapeMismatch);
}

TEST(Split, StratifiedAndDisjoint) {
    std::vector<std::int64_t> strata;
    for (int s = 0; s < 10; ++s)
        for (int i = 0; i < 20; ++i) strata.push_back(s);
    const auto sp = stratified_split(strata, 3, 0.2, 0.1);
    EXPECT_EQ(sp.test.size(), 40u);
    EXPECT_EQ(sp.val.size(), 20u);
    EXPECT_EQ(sp.train.size(), 140u);
    std::set<std::size_t> all(sp.train.begin(), sp.train.end());
    all.insert(sp.val.begin(), sp.val.end());
    all.insert(sp.test.begin(), sp.test.end());
    EXPECT_EQ(all.size(), 200u);
    std::map<std::int64_t, int> per;
    for (auto i : sp.test) ++per[strata[i]];
    for (auto& [k, v] : per) EXPECT_EQ(v, 4) << k;
    EXPECT_EQ(stratified_split(strata, 3, 0.2, 0.1).test, sp.test);
    EXPECT_NE(stratified_split(strata, 4, 0.2, 0.1).test, sp.test);
}

TEST(Weather, FormulaAndNoise) {
    const WeatherModel m;
    EXPECT_EQ(m.clear_sky(0), 0.0);
    EXPECT_EQ(m.clear_sky(6), 0.0);
    EXPECT_NEAR(m.clear_sky(12), 1000.0, 1e-9);
    const WeatherSample night{0.0, 15.0, 0.3, 2};
    Rng rng(1);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(actual_solar_power(m, night, 0.9, rng), 0.0);
    const WeatherSample noon{1000.0, 25.0, 0.0, 12};
    // T_cell = 55 C -> 12% derating
    EXPECT_NEAR(solar_formula(noon, 1.0), 0.88, 1e-12);
    for (int i = 0; i < 100; ++i) {
        const double p = actual_solar_power(m, noon, 0.9, rng);
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 0.9);
    }
    const auto a = draw_hour(m, draw_day(5, 2), 5, 2, 13), b = draw_hour(m, draw_day(5, 2), 5, 2, 13);
    EXPECT_EQ(a.actual.cloud_cover, b.actual.cloud_cover);
    EXPECT_EQ(a.forecast.ambient_temp, b.forecast.ambient_temp);
    EXPECT_GE(a.forecast.cloud_cover, 0.0);
    EXPECT_LE(a.forecast.cloud_cover, 1.0);
}

TEST(SequenceBatch, ShiftDelaysTraceAndCyclesPrefault) {
    faultsim::VoltageTrace tr;
    tr.steps = 30;
    tr.buses = 2;
    tr.samples.resize(60);
    for (std::size_t t = 0; t < 30; ++t) {
        tr.at(t, 0) = static_cast<double>(t);
        tr.at(t, 1) = -static_cast<double>(t);
    }
    const std::vector<const faultsim::VoltageTrace*> traces{&tr};
    const std::vector<std::size_t> idx{0, 0}, shifts{0, 13};
    const auto x = batch_inputs(traces, idx, shifts);
    ASSERT_EQ(x.cols(), 60);
    for (Eigen::Index t = 0; t < 30; ++t) {
        EXPECT_EQ(x(0, 2 * t), static_cast<double>(t));
        const double want = t >= 13 ? static_cast<double>(t - 13) : static_cast<double>(t % 10);
        EXPECT_EQ(x(0, 2 * t + 1), want) << "t " << t;
        EXPECT_EQ(x(1, 2 * t + 1), -want);
    }
}

TEST(SequenceBatch, ShiftMustLeaveWindow) {
    auto cfg = tiny_config();
    cfg.seq.max_shift = 99;
    EXPECT_THROW(train_fault_type_model(small_faults(), cfg, 1), ValidationError);
}

TEST(FaultModels, OneKindIsDegenerate) {
    faultsim::FaultDataset ds = small_faults();
    std::erase_if(ds.traces, [](const auto& t) { return t.label_kind != faultsim::TraceKind::LineGround; });
    EXPECT_THROW(train_fault_type_model(ds, tiny_config(), 1), DegenerateLabels);
}

TEST(FaultModels, TasksCoverExpectedTraces) {
    const auto& ds = small_faults();
    const auto t = fault_type_task(ds, false);
    EXPECT_EQ(t.traces.size(), 4u * 23 * 2);
    EXPECT_EQ(t.num_classes, 4u);
    EXPECT_EQ(fault_type_task(ds, true).traces.size(), 2u * 23 * 2);
    const auto loc = locator_task(ds, FaultKind::LineLine, 40);
    EXPECT_EQ(loc.num_classes, 24u);
    EXPECT_EQ(std::count(loc.labels.begin(), loc.labels.end(), 0), 40);
    EXPECT_EQ(loc.traces.size(), 23u * 2 + 40);
}

TEST(FaultModels, ProbabilitiesNormalised) {
    const auto& r = tiny_type_model();
    EXPECT_EQ(r.model.kind, nn::ModelKind::FaultType);
    EXPECT_FALSE(r.curve.empty());
    for (std::size_t i = 0; i < 10; ++i) {
        const auto p = classify_fault_type(r.model, small_faults().traces[i * 17]);
        double sum = 0.0;
        for (double v : p.probabilities) sum += v;
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(FaultModels, ZeroHeadGivesUniform) {
    auto m = tiny_type_model().model;
    auto net = SequenceNet::from_model(m);
    net.out.weights.setZero();
    net.out.bias.setZero();
    net.store(m);
    const auto p = classify_fault_type(m, small_faults().traces[3]);
    for (double v : p.probabilities) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(FaultModels, DeterministicAndCheckpointable) {
    const auto again = train_fault_type_model(small_faults(), tiny_config(), 1);
    EXPECT_EQ(nn::serialize_checkpoint(again.model), nn::serialize_checkpoint(tiny_type_model().model));
    const auto back = nn::parse_checkpoint(nn::serialize_checkpoint(again.model));
    const auto a = evaluate(back, small_faults(), EvalSubset::Test);
    EXPECT_NEAR(a.accuracy, again.test_acc, 1e-12);
}

TEST(FaultModels, WrongTraceShapeRejected) {
    faultsim::TraceOptions opt;
    opt.steps = 50;
    const auto tr = faultsim::synthesize_trace(grid::build_default_grid(), std::nullopt, 1, opt);
    EXPECT_THROW(classify_fault_type(tiny_type_model().model, tr), ShapeMismatch);
}

TEST(FaultModels, LocatorAndSvmBaseline) {
    const auto loc = train_bus_locator(small_faults(), FaultKind::ThreePhase, tiny_config(), 2);
    EXPECT_EQ(loc.model.kind, nn::ModelKind::BusLocator);
    const auto b = locate_fault(loc.model, small_faults().traces[0]);
    EXPECT_GE(b.bus, 0);
    EXPECT_LE(b.bus, 23);
    EXPECT_EQ(b.probabilities.size(), 24u);

    const auto task = fault_type_task(small_faults(), false);
    const auto svm = train_svm_baseline(task, tiny_type_model().split, 3);
    EXPECT_GE(svm.test_acc, 0.0);
    EXPECT_LE(svm.test_acc, 1.0);
}

TEST(Monitor, ShortStreamEmitsNothing) {
    std::map<FaultKind, nn::ModelParams> locs;
    const auto loc = train_bus_locator(small_faults(), FaultKind::ThreePhase, tiny_config(), 2).model;
    for (auto k : faultsim::kAllFaultKinds) locs[k] = loc;
    StreamMonitor mon(tiny_type_model().model, locs);
    EXPECT_EQ(mon.window(), 100u);
    const auto g = grid::build_default_grid();
    const faultsim::SequenceNetworks nets(g);
    const auto s = synthetic_stream(g, nets, FaultKind::ThreePhase, 5, 0, 120, 105, 9);
    for (std::size_t t = 0; t < 99; ++t) EXPECT_FALSE(mon.push(s.samples[t]).has_value());
    const auto e = mon.push(s.samples[99]);
    ASSERT_TRUE(e.has_value());
    EXPECT_EQ(e->step, 99u);
    EXPECT_EQ(e->bus == 0, !e->kind.has_value());
    EXPECT_GE(e->confidence, 0.0);
    EXPECT_LE(e->confidence, 1.0);
    mon.reset();
    EXPECT_FALSE(mon.push(s.samples[0]).has_value());
    EXPECT_THROW(mon.push(std::vector<double>(3, 1.0)), ShapeMismatch);

    locs.erase(FaultKind::LineLine);
    EXPECT_THROW(StreamMonitor(tiny_type_model().model, locs), ValidationError);
}

TEST(Monitor, DetectionKeepsDeadlineEmission) {
    std::map<FaultKind, nn::ModelParams> locs;
    const auto loc = train_bus_locator(small_faults(), FaultKind::ThreePhase, tiny_config(), 2).model;
    for (auto k : faultsim::kAllFaultKinds) locs[k] = loc;
    StreamMonitor mon(tiny_type_model().model, locs);
    const auto g = grid::build_default_grid();
    const faultsim::SequenceNetworks nets(g);
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto s = synthetic_stream(g, nets, FaultKind::ThreePhase, 7, 0, 150, 110, seed);
        const auto d = run_detection(mon, s, 25);
        ASSERT_TRUE(d.at_deadline.has_value());
        EXPECT_EQ(d.at_deadline->step, 135u);
        if (d.false_alarm) {
            EXPECT_FALSE(d.detected);
        } else if (d.bus != 0) {
            EXPECT_EQ(d.detected, d.delay <= 25);
            EXPECT_TRUE(d.kind.has_value());
        }
        const auto cut = synthetic_stream(g, nets, FaultKind::ThreePhase, 7, 0, 120, 110, seed);
        EXPECT_FALSE(run_detection(mon, cut, 25).at_deadline.has_value());
    }
}

TEST(Monitor, StreamFollowsFaultEnvelope) {
    const auto g = grid::build_default_grid();
    const faultsim::SequenceNetworks nets(g);
    const auto s = synthetic_stream(g, nets, FaultKind::ThreePhase, 5, 0, 200, 150, 4);
    ASSERT_EQ(s.samples.size(), 200u);
    EXPECT_GT(s.samples[149][4], 0.9);
    EXPECT_LT(s.samples[150][4], 0.05);
    EXPECT_EQ(s.onset, 150u);
}

TEST(Solar, PredictionsRespectPhysics) {
    const auto g = grid::build_default_grid();
    const auto& ds = four_days();
    const auto samples = solar_samples(ds, g, ds.split.train);
    EXPECT_EQ(samples.size(), ds.split.train.size() * 24 * 5);
    const auto m = train_solar_model(samples, 3);
    EXPECT_EQ(m.kind, nn::ModelKind::SolarPower);
    for (int hour : {0, 3, 5, 20, 23}) {
        const WeatherSample night{0.0, 18.0, 0.4, hour};
        EXPECT_LE(predict_solar_power(m, night, 0.9), 0.02 * 0.9) << hour;
    }
    const WeatherSample noon{1000.0, 28.0, 0.05, 12};
    const double truth = solar_formula(noon, 0.9);
    EXPECT_NEAR(predict_solar_power(m, noon, 0.9), truth, 0.15 * truth);
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        const WeatherSample w{rng.uniform(0, 1500), rng.uniform(-10, 50), rng.uniform(0, 1), static_cast<int>(rng.index(24))};
        const double p = predict_solar_power(m, w, 0.6);
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 0.6);
    }
    EXPECT_THROW(train_solar_model({}, 1), DegenerateData);
}

TEST(Congestion, SamplesAndModel) {
    const auto g = grid::build_default_grid();
    const auto& ds = four_days();
    const auto samples = congestion_samples(ds, g, PowerMode::KnownPower);
    ASSERT_EQ(samples.size(), ds.scenarios.size());
    const auto& s0 = samples[12 * 32];  // all-off mask at noon on day 0
    for (double v : s0.committed_solar) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(congestion_features(s0).size(), 12);
    EXPECT_THROW(congestion_samples(ds, g, PowerMode::PredictedPower), ValidationError);

    CongestionConfig cfg;
    cfg.steps = 500;
    const auto [train, test] = split_by_day(samples, ds.split);
    EXPECT_EQ(train.size() + test.size(), samples.size());
    const auto m = train_congestion_model(train, PowerMode::KnownPower, 1, cfg);
    for (double p : predict_congestion(m, test)) {
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
    EXPECT_NEAR(predict_congestion(m, test[5]), predict_congestion(m, test)[5], 1e-12);

    std::vector<CongestionSample> one_class;
    for (const auto& s : samples)
        if (!s.congested) one_class.push_back(s);
    EXPECT_THROW(train_congestion_model(one_class, PowerMode::KnownPower, 1, cfg), DegenerateLabels);
}
