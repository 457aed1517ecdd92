#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridseer/common/fileio.hpp"
#include "gridseer/common/hash.hpp"
#include "gridseer/dispatch/io.hpp"
#include "gridseer/dispatch/surrogate.hpp"
#include "gridseer/faultsim/dataset.hpp"
#include "gridseer/grid/default_grid.hpp"
#include "gridseer/grid/io.hpp"
#include "gridseer/gridml/congestion.hpp"
#include "gridseer/gridml/fault_models.hpp"
#include "gridseer/gridml/metrics.hpp"
#include "gridseer/gridml/monitor.hpp"
#include "gridseer/gridml/solar.hpp"
#include "gridseer/nn/model.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace gridseer;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridArgs {
    std::string path;
    bool use_default = false;

    bool given() const { return use_default || !path.empty(); }
    grid::GridState load() const {
        if (!path.empty()) return grid::load_grid(path);
        return grid::build_default_grid();
    }
    json config() const { return path.empty() ? json("default") : json(path); }
};

void add_grid_options(CLI::App* cmd, GridArgs& g) {
    cmd->add_option("--grid", g.path, "Grid JSON file");
    cmd->add_flag("--default-grid", g.use_default, "Use the built-in 23-bus grid");
}

std::string utc_stamp(const char* fmt) {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, fmt, &tm);
    return buf;
}

std::string slug(std::string s) {
    for (char& c : s)
        if (c == ' ') c = '-';
    return s;
}

/// A fresh run-stamped directory holding manifest.json and the artifacts.
class RunDir {
public:
    RunDir(const std::string& command, json config, const std::vector<std::string>& inputs,
           const std::string& out_flag) {
        fs::path base = out_flag;
        if (base.empty()) {
            const char* env = std::getenv("GRIDSEER_OUT");
            base = env && *env ? env : "runs";
        }
        fs::create_directories(base);
        const std::string hash = fnv1a_hex(config.dump()).substr(0, 8);
        const std::string stem = slug(command) + "-" + utc_stamp("%Y%m%dT%H%M%SZ") + "-" + hash;
        for (int k = 0;; ++k) {
            dir_ = base / (k == 0 ? stem : stem + "-" + std::to_string(k));
            if (fs::create_directory(dir_)) break;
        }
        manifest_ = {{"command", command}, {"config", std::move(config)}, {"created_utc", utc_stamp("%FT%TZ")}};
        json in = json::array();
        for (const auto& p : inputs) in.push_back({{"path", p}, {"fnv1a", fnv1a_hex(read_file(p))}});
        manifest_["inputs"] = std::move(in);
        manifest_["outputs"] = json::array();
        write_file_atomic(dir_ / "manifest.json", manifest_.dump(2) + "\n");
    }

    const fs::path& dir() const { return dir_; }
    fs::path path(const std::string& name) const { return dir_ / name; }

    void write(const std::string& name, std::string_view bytes) {
        write_file_atomic(dir_ / name, bytes);
        record(name);
    }
    void record(const std::string& name) {
        manifest_["outputs"].push_back({{"path", name}, {"fnv1a", fnv1a_hex(read_file(dir_ / name))}});
    }
    void finish() { write_file_atomic(dir_ / "manifest.json", manifest_.dump(2) + "\n"); }

private:
    fs::path dir_;
    json manifest_;
};

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

void print_line(const json& j) { std::cout << j.dump() << '\n'; }

std::string checkpoint_name(faultsim::FaultKind k) { return "locator_" + std::string(to_string(k)) + ".gsnn"; }

/// Grid for a scenario dataset: the given one, else the built-in grid; must
/// be the grid the scenarios were generated on.
grid::GridState scenario_grid(const GridArgs& ga, const dispatch::SubsetDataset& ds) {
    grid::GridState g = ga.load();
    if (grid::grid_hash(g) != ds.grid_hash)
        throw ValidationError("scenario data was generated on a different grid (pass --grid)");
    return g;
}

json metrics_summary(const gridml::TrainedClassifier& r) {
    return {{"train_acc", r.train_acc},
            {"test_acc", r.test_acc},
            {"best_epoch", r.best_epoch},
            {"epochs_run", r.curve.size()},
            {"split", {{"train", r.split.train.size()}, {"val", r.split.val.size()}, {"test", r.split.test.size()}}}};
}

// ---- gen -------------------------------------------------------------------

struct GenArgs {
    GridArgs grid;
    std::uint64_t seed = 42;
    std::size_t runs = 100;
    std::size_t days = 14;
    unsigned threads = 0;
    std::string out;
};

int cmd_gen_faults(const GenArgs& a) {
    if (!a.grid.given()) throw UsageError("gen faults needs --grid PATH or --default-grid");
    const auto g = a.grid.load();
    json cfg{{"grid", a.grid.config()}, {"seed", a.seed}, {"runs", a.runs}};
    RunDir run("gen faults", cfg, a.grid.path.empty() ? std::vector<std::string>{} : std::vector{a.grid.path}, a.out);
    faultsim::DatasetOptions opt;
    opt.threads = a.threads;
    const auto ds = faultsim::gen_fault_dataset(g, a.runs, a.seed, opt);
    faultsim::write_dataset(ds, run.path("faults.csv"));
    run.record("faults.csv");
    run.record("faults.json");
    run.finish();
    std::map<std::string, std::size_t> balance;
    for (const auto& tr : ds.traces) ++balance[std::string(to_string(tr.label_kind))];
    print_line({{"command", "gen faults"}, {"traces", ds.traces.size()}, {"class_balance", balance},
                {"run_dir", run.dir().string()}});
    return 0;
}

int cmd_gen_subsets(const GenArgs& a) {
    if (!a.grid.given()) throw UsageError("gen subsets needs --grid PATH or --default-grid");
    const auto g = a.grid.load();
    json cfg{{"grid", a.grid.config()}, {"seed", a.seed}, {"days", a.days}};
    RunDir run("gen subsets", cfg, a.grid.path.empty() ? std::vector<std::string>{} : std::vector{a.grid.path}, a.out);
    dispatch::ScenarioOptions opt;
    opt.threads = a.threads;
    const auto ds = dispatch::gen_subset_scenarios(g, a.days, a.seed, opt);
    dispatch::write_scenarios(ds, run.path("scenarios.csv"));
    run.record("scenarios.csv");
    run.record("scenarios.json");
    run.finish();
    std::size_t congested = 0, failed = 0;
    for (const auto& s : ds.scenarios) {
        congested += s.congested;
        failed += !s.converged;
    }
    print_line({{"command", "gen subsets"},
                {"scenarios", ds.scenarios.size()},
                {"days", ds.days},
                {"masks_per_hour", std::size_t{1} << ds.scenarios.front().mask.size()},
                {"class_balance", {{"congested", congested}, {"clear", ds.scenarios.size() - congested}}},
                {"nonconverged", failed},
                {"run_dir", run.dir().string()}});
    return 0;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
    std::string data;
    GridArgs grid;
    std::uint64_t seed = 42;
    std::string out;
    bool paper_mode = false;
    std::size_t epochs = 30;
    std::string kind = "all";
    std::string mode = "known";
    std::size_t steps = 2500;
    bool verbose = false;
};

json seq_config_json(const TrainArgs& a) { return {{"epochs", a.epochs}, {"paper_mode", a.paper_mode}}; }

gridml::EpochCallback progress(const TrainArgs& a, const std::string& tag) {
    if (!a.verbose) return {};
    return [tag](const gridml::CurvePoint& c) {
        std::fprintf(stderr, "%s epoch %zu loss %.4f train %.4f val %.4f test %.4f\n", tag.c_str(), c.epoch,
                     c.train_loss, c.train_acc, c.val_acc, c.test_acc);
    };
}

int cmd_train_fault_type(const TrainArgs& a) {
    json cfg{{"data", a.data}, {"seed", a.seed}, {"model", seq_config_json(a)}};
    RunDir run("train fault-type", cfg, {a.data}, a.out);
    const auto ds = faultsim::read_dataset(a.data);
    gridml::FaultModelConfig mc;
    mc.paper_mode = a.paper_mode;
    mc.seq.epochs = a.epochs;
    const auto r = gridml::train_fault_type_model(ds, mc, a.seed, progress(a, "fault-type"));
    const auto task = gridml::fault_type_task(ds, a.paper_mode);
    const auto svm = gridml::train_svm_baseline(task, r.split, a.seed);
    const auto test = gridml::evaluate(r.model, ds, gridml::EvalSubset::Test);

    json metrics = metrics_summary(r);
    metrics["task"] = "fault-type";
    metrics["paper_mode"] = a.paper_mode;
    metrics["test"] = gridml::to_json(test, gridml::class_labels_of(r.model));
    metrics["svm_baseline"] = {{"train_acc", svm.train_acc}, {"test_acc", svm.test_acc}};
    nn::save_checkpoint(r.model, run.path("fault_type.gsnn"));
    run.record("fault_type.gsnn");
    run.write("metrics.json", dump_json(metrics));
    run.write("curve.csv", gridml::curve_csv(r.curve));
    run.finish();
    print_line({{"command", "train fault-type"}, {"test_acc", r.test_acc}, {"svm_test_acc", svm.test_acc},
                {"run_dir", run.dir().string()}});
    return 0;
}

int cmd_train_bus_locator(const TrainArgs& a) {
    std::vector<faultsim::FaultKind> kinds;
    if (a.kind == "all") {
        kinds.assign(faultsim::kAllFaultKinds.begin(), faultsim::kAllFaultKinds.end());
    } else {
        const auto k = faultsim::parse_fault_kind(a.kind);
        if (!k) throw UsageError("--kind must be ThreePhase, BranchTrip, LineLine, LineGround or all");
        kinds.push_back(*k);
    }
    json cfg{{"data", a.data}, {"seed", a.seed}, {"kind", a.kind}, {"model", seq_config_json(a)}};
    RunDir run("train bus-locator", cfg, {a.data}, a.out);
    const auto ds = faultsim::read_dataset(a.data);
    gridml::FaultModelConfig mc;
    mc.seq.epochs = a.epochs;
    json metrics = json::object();
    json summary = json::object();
    for (auto k : kinds) {
        const std::string name(to_string(k));
        const auto r = gridml::train_bus_locator(ds, k, mc, a.seed, progress(a, "locator " + name));
        const auto test = gridml::evaluate(r.model, ds, gridml::EvalSubset::Test);
        json m = metrics_summary(r);
        m["test"] = gridml::to_json(test, gridml::class_labels_of(r.model));
        m["nofault_recall"] = test.recall.at(0);
        metrics[name] = std::move(m);
        summary[name] = {{"test_acc", r.test_acc}, {"nofault_recall", test.recall.at(0)}};
        nn::save_checkpoint(r.model, run.path(checkpoint_name(k)));
        run.record(checkpoint_name(k));
        run.write("curve_" + name + ".csv", gridml::curve_csv(r.curve));
    }
    run.write("metrics.json", dump_json({{"task", "bus-locator"}, {"locators", metrics}}));
    run.finish();
    print_line({{"command", "train bus-locator"}, {"locators", summary}, {"run_dir", run.dir().string()}});
    return 0;
}

int cmd_train_congestion(const TrainArgs& a) {
    if (a.mode != "known" && a.mode != "predicted") throw UsageError("--mode must be known or predicted");
    const auto mode = a.mode == "known" ? gridml::PowerMode::KnownPower : gridml::PowerMode::PredictedPower;
    json cfg{{"data", a.data}, {"grid", a.grid.config()}, {"seed", a.seed}, {"mode", a.mode}};
    std::vector<std::string> inputs{a.data};
    if (!a.grid.path.empty()) inputs.push_back(a.grid.path);
    RunDir run("train congestion", cfg, inputs, a.out);
    const auto ds = dispatch::read_scenarios(a.data);
    const auto g = scenario_grid(a.grid, ds);
    const auto r = gridml::run_congestion_experiment(ds, g, mode, a.seed);
    json metrics{{"task", "congestion"},
                 {"mode", std::string(gridml::to_string(mode))},
                 {"train_acc", r.train_acc},
                 {"test_acc", r.test_acc},
                 {"svm_test_acc", r.svm_test_acc},
                 {"train_samples", r.train_samples},
                 {"test_samples", r.test_samples}};
    nn::save_checkpoint(r.model, run.path("congestion.gsnn"));
    run.record("congestion.gsnn");
    if (r.solar_model) {
        nn::save_checkpoint(*r.solar_model, run.path("solar.gsnn"));
        run.record("solar.gsnn");
    }
    run.write("metrics.json", dump_json(metrics));
    run.finish();
    print_line({{"command", "train congestion"}, {"mode", a.mode}, {"test_acc", r.test_acc},
                {"svm_test_acc", r.svm_test_acc}, {"run_dir", run.dir().string()}});
    return 0;
}

json solar_errors(const nn::ModelParams& m, const std::vector<gridml::SolarSample>& s) {
    double abs = 0.0, worst = 0.0;
    for (const auto& x : s) {
        const double e = std::abs(gridml::predict_solar_power(m, x.weather, x.rated) - x.power);
        abs += e;
        worst = std::max(worst, e);
    }
    return {{"samples", s.size()}, {"mae", s.empty() ? 0.0 : abs / static_cast<double>(s.size())}, {"max_error", worst}};
}

int cmd_train_solar(const TrainArgs& a) {
    json cfg{{"data", a.data}, {"grid", a.grid.config()}, {"seed", a.seed}};
    std::vector<std::string> inputs{a.data};
    if (!a.grid.path.empty()) inputs.push_back(a.grid.path);
    RunDir run("train solar", cfg, inputs, a.out);
    const auto ds = dispatch::read_scenarios(a.data);
    const auto g = scenario_grid(a.grid, ds);
    const auto train = gridml::solar_samples(ds, g, ds.split.train);
    const auto test = gridml::solar_samples(ds, g, ds.split.test);
    const auto model = gridml::train_solar_model(train, a.seed);
    json metrics{{"task", "solar"}, {"train", solar_errors(model, train)}, {"test", solar_errors(model, test)}};
    nn::save_checkpoint(model, run.path("solar.gsnn"));
    run.record("solar.gsnn");
    run.write("metrics.json", dump_json(metrics));
    run.finish();
    print_line({{"command", "train solar"}, {"test_mae", metrics["test"]["mae"]}, {"run_dir", run.dir().string()}});
    return 0;
}

json breakdown_json(const dispatch::LossBreakdown& b) {
    return {{"mse", b.total}, {"l1_like_mse", b.l1_like}, {"l2_like_mse", b.l2_like},
            {"l1_like_count", b.n_l1}, {"l2_like_count", b.n_l2}};
}

int cmd_train_surrogate(const TrainArgs& a) {
    json cfg{{"data", a.data}, {"seed", a.seed}, {"steps", a.steps}};
    RunDir run("train surrogate", cfg, {a.data}, a.out);
    const auto ds = dispatch::read_scenarios(a.data);
    dispatch::SurrogateConfig sc;
    sc.steps = a.steps;
    const auto r = dispatch::train_surrogate(ds, a.seed, sc);
    json metrics{{"task", "surrogate"}, {"steps", a.steps}, {"train", breakdown_json(r.train)},
                 {"test", breakdown_json(r.test)}};
    nn::save_checkpoint(r.model, run.path("surrogate.gsnn"));
    run.record("surrogate.gsnn");
    run.write("metrics.json", dump_json(metrics));
    run.write("loss_curve.csv", dispatch::loss_curve_csv(r.curve));
    run.finish();
    print_line({{"command", "train surrogate"}, {"steps", a.steps}, {"test_mse", r.test.total},
                {"run_dir", run.dir().string()}});
    return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
    std::string model;
    std::string data;
    std::string subset = "test";
    std::string solar_model;
    GridArgs grid;
    std::string out;
};

void print_table(const std::string& kind, const std::string& subset, const json& rows) {
    std::printf("%-12s %s\n%-12s %s\n", "model", kind.c_str(), "subset", subset.c_str());
    for (const auto& [k, v] : rows.items())
        if (v.is_number_float())
            std::printf("%-12s %.6f\n", k.c_str(), v.get<double>());
        else if (v.is_number())
            std::printf("%-12s %s\n", k.c_str(), v.dump().c_str());
}

int cmd_eval(const EvalArgs& a) {
    if (a.subset != "all" && a.subset != "train" && a.subset != "test")
        throw UsageError("--subset must be all, train or test");
    json cfg{{"model", a.model}, {"data", a.data}, {"subset", a.subset}};
    std::vector<std::string> inputs{a.model, a.data};
    if (!a.solar_model.empty()) inputs.push_back(a.solar_model);
    RunDir run("eval", cfg, inputs, a.out);
    const auto m = nn::load_checkpoint(a.model);
    json metrics{{"model_kind", std::string(to_string(m.kind))}, {"subset", a.subset}};

    if (m.kind == nn::ModelKind::FaultType || m.kind == nn::ModelKind::BusLocator) {
        const auto ds = faultsim::read_dataset(a.data);
        const auto subset = a.subset == "all"     ? gridml::EvalSubset::All
                            : a.subset == "train" ? gridml::EvalSubset::Train
                                                  : gridml::EvalSubset::Test;
        const auto r = gridml::evaluate(m, ds, subset);
        const auto labels = gridml::class_labels_of(m);
        metrics["metrics"] = gridml::to_json(r, labels);
        print_table(std::string(to_string(m.kind)), a.subset, {{"samples", r.total}, {"accuracy", r.accuracy}});
        std::printf("%-14s %8s %10s %10s\n", "class", "support", "precision", "recall");
        for (std::size_t c = 0; c < r.support.size(); ++c)
            std::printf("%-14s %8zu %10.6f %10.6f\n", labels[c].c_str(), r.support[c], r.precision[c], r.recall[c]);
    } else {
        const auto ds = dispatch::read_scenarios(a.data);
        auto keep = [&](std::size_t day) {
            return a.subset == "all" || (a.subset == "test") == ds.split.is_test(day);
        };
        json rows;
        if (m.kind == nn::ModelKind::Congestion) {
            const auto g = scenario_grid(a.grid, ds);
            const bool predicted = m.metadata.at("mode").get<std::string>() == "PredictedPower";
            std::optional<nn::ModelParams> solar;
            if (predicted) {
                if (a.solar_model.empty()) throw UsageError("a PredictedPower model needs --solar-model");
                solar = nn::load_checkpoint(a.solar_model);
            }
            auto samples = gridml::congestion_samples(
                ds, g, predicted ? gridml::PowerMode::PredictedPower : gridml::PowerMode::KnownPower,
                solar ? &*solar : nullptr);
            std::erase_if(samples, [&](const auto& s) { return !keep(s.day); });
            rows = {{"samples", samples.size()}, {"accuracy", gridml::congestion_accuracy(m, samples)}};
        } else if (m.kind == nn::ModelKind::SolarPower) {
            const auto g = scenario_grid(a.grid, ds);
            std::vector<std::size_t> days;
            for (std::size_t d = 0; d < ds.days; ++d)
                if (keep(d)) days.push_back(d);
            rows = solar_errors(m, gridml::solar_samples(ds, g, days));
        } else if (m.kind == nn::ModelKind::SubsetSurrogate) {
            const nn::Mlp net = nn::Mlp::from_model(m);
            double se = 0.0;
            std::size_t n = 0;
            for (const auto& s : ds.scenarios) {
                if (!keep(s.day)) continue;
                const double p = net.forward(dispatch::surrogate_input(s.pre_voltages, s.mask))(0, 0);
                se += (p - s.total) * (p - s.total);
                ++n;
            }
            rows = {{"samples", n}, {"mse", n ? se / static_cast<double>(n) : 0.0}};
        } else {
            throw ShapeMismatch("eval does not support " + std::string(to_string(m.kind)) + " checkpoints");
        }
        metrics["metrics"] = rows;
        print_table(std::string(to_string(m.kind)), a.subset, rows);
    }
    run.write("metrics.json", dump_json(metrics));
    run.finish();
    return 0;
}

// ---- select ----------------------------------------------------------------

struct SelectArgs {
    std::string model;
    GridArgs grid;
    std::string weather;
    bool oracle = false;
    std::string out;
};

gridml::WeatherSample weather_of(const json& j, int hour) {
    gridml::WeatherSample w;
    w.irradiance = j.at("irradiance").get<double>();
    w.ambient_temp = j.value("ambient_temp", 25.0);
    w.cloud_cover = j.value("cloud_cover", 0.0);
    w.hour = hour;
    if (w.irradiance < 0.0 || w.cloud_cover < 0.0 || w.cloud_cover > 1.0)
        throw ValidationError("weather needs irradiance >= 0 and cloud_cover in [0, 1]");
    return w;
}

/// Either {"seed", "day", "hour"} naming a synthetic hour, or explicit
/// {"hour", "actual": weather, "forecast": weather} with optional
/// "committed"/"actual_power" per solar generator.
dispatch::HourContext hour_of(const grid::GridState& g, const json& w) {
    if (w.contains("seed"))
        return dispatch::make_hour(g, w.at("seed").get<std::uint64_t>(), w.value("day", std::size_t{0}),
                                   w.at("hour").get<int>());
    const int hour = w.at("hour").get<int>();
    if (hour < 0 || hour > 23) throw ValidationError("hour must be in 0..23");
    gridml::HourWeather hw;
    hw.actual = weather_of(w.at("actual"), hour);
    hw.forecast = w.contains("forecast") ? weather_of(w.at("forecast"), hour) : hw.actual;
    std::vector<double> committed, actual;
    for (std::size_t k : g.solar_indices()) {
        committed.push_back(gridml::solar_formula(hw.forecast, g.generators[k].p_rated));
        actual.push_back(gridml::solar_formula(hw.actual, g.generators[k].p_rated));
    }
    if (w.contains("committed")) committed = w.at("committed").get<std::vector<double>>();
    if (w.contains("actual_power")) actual = w.at("actual_power").get<std::vector<double>>();
    return dispatch::hour_from_weather(g, hw, committed, actual);
}

int cmd_select(const SelectArgs& a) {
    if (!a.grid.given()) throw UsageError("select needs --grid PATH or --default-grid");
    json cfg{{"model", a.model}, {"grid", a.grid.config()}, {"weather", a.weather}, {"oracle", a.oracle}};
    std::vector<std::string> inputs{a.model, a.weather};
    if (!a.grid.path.empty()) inputs.push_back(a.grid.path);
    RunDir run("select", cfg, inputs, a.out);
    const auto g = a.grid.load();
    const auto m = nn::load_checkpoint(a.model);
    json wj;
    try {
        wj = json::parse(read_file(a.weather));
    } catch (const json::exception& e) {
        throw ParseError("weather file: " + std::string(e.what()));
    }
    const std::size_t n_solar = g.solar_indices().size();
    if (n_solar > dispatch::kMaxEnumerated) throw TooManyGenerators("at most 20 Solar generators can be enumerated");
    dispatch::HourContext h;
    try {
        h = hour_of(g, wj);
    } catch (const json::exception& e) {
        throw ParseError("weather file: " + std::string(e.what()));
    }
    const auto sel = dispatch::select_optimal_subset(m, h.pre_voltages, n_solar);
    json out{{"mask", sel.mask.str()},
             {"bits", sel.mask.bits},
             {"predicted_total", sel.predicted},
             {"evaluations", sel.evaluations}};
    if (a.oracle) {
        dispatch::PenaltyScaler scaler{m.metadata.at("l1_min").get<double>(), m.metadata.at("l1_max").get<double>(),
                                       true};
        const auto ranking = dispatch::brute_force_best_subset(h, scaler);
        json rows = json::array();
        double chosen_true = 0.0;
        for (const auto& r : ranking) {
            rows.push_back({{"mask", r.mask.str()}, {"total", r.total}, {"l1", r.l1}, {"l2", r.l2},
                            {"congested", r.congested}, {"converged", r.converged}});
            if (r.mask == sel.mask) chosen_true = r.total;
        }
        out["oracle"] = {{"ranking", rows},
                         {"optimum_mask", ranking.front().mask.str()},
                         {"optimum_total", ranking.front().total},
                         {"chosen_true_total", chosen_true},
                         {"regret", chosen_true - ranking.front().total}};
    }
    run.write("selection.json", dump_json(out));
    run.finish();
    print_line(out);
    return 0;
}

// ---- monitor ---------------------------------------------------------------

struct MonitorArgs {
    std::string fault_model;
    std::string locator_dir;
    std::string out;
};

int cmd_monitor(const MonitorArgs& a) {
    json cfg{{"fault_model", a.fault_model}, {"locator_models", a.locator_dir}};
    RunDir run("monitor", cfg, {a.fault_model}, a.out);
    auto type_model = nn::load_checkpoint(a.fault_model);
    if (type_model.kind != nn::ModelKind::FaultType) throw ShapeMismatch("--fault-model is not a FaultType model");
    std::map<faultsim::FaultKind, nn::ModelParams> locators;
    for (auto k : gridml::fault_type_classes(type_model.metadata.at("paper_mode").get<bool>()))
        locators.emplace(k, nn::load_checkpoint(fs::path(a.locator_dir) / checkpoint_name(k)));
    gridml::StreamMonitor mon(std::move(type_model), std::move(locators));
    run.finish();

    std::size_t lines = 0, bad = 0;
    std::string line;
    std::vector<double> sample;
    while (std::getline(std::cin, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++lines;
        sample.clear();
        try {
            const auto j = json::parse(line);
            if (!j.is_array() || j.size() != mon.buses())
                throw std::runtime_error("expected an array of " + std::to_string(mon.buses()) + " numbers");
            for (const auto& v : j) {
                if (!v.is_number()) throw std::runtime_error("non-numeric entry");
                sample.push_back(v.get<double>());
            }
        } catch (const std::exception& e) {
            ++bad;
            std::fprintf(stderr, "line %zu skipped: %s\n", lines, e.what());
            continue;
        }
        const auto e = mon.push(sample);
        if (!e) continue;
        print_line({{"step", e->step},
                    {"fault_kind", e->kind ? std::string(to_string(*e->kind)) : std::string("NoFault")},
                    {"bus", e->bus},
                    {"confidence", e->confidence}});
    }
    std::cout.flush();
    if (lines > 0 && bad == lines) {
        std::fprintf(stderr, "error: every input line was malformed\n");
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gridseer: grid simulation, fault learning and solar dispatch"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Synthesize datasets")->require_subcommand(1);
    auto* gen_faults = gen_cmd->add_subcommand("faults", "Fault voltage traces");
    auto* gen_subsets = gen_cmd->add_subcommand("subsets", "Solar subset scenarios");
    for (auto* c : {gen_faults, gen_subsets}) {
        add_grid_options(c, gen.grid);
        c->add_option("--seed", gen.seed, "Seed");
        c->add_option("--out", gen.out, "Output directory (default $GRIDSEER_OUT or ./runs)");
        c->add_option("--threads", gen.threads, "Worker threads (0 = all cores)");
    }
    gen_faults->add_option("--runs", gen.runs, "Runs per (kind, bus) case")->check(CLI::PositiveNumber);
    gen_subsets->add_option("--days", gen.days, "Synthetic days")->check(CLI::PositiveNumber);

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Train a model")->require_subcommand(1);
    auto* t_type = train_cmd->add_subcommand("fault-type", "Fault-type classifier");
    auto* t_loc = train_cmd->add_subcommand("bus-locator", "Faulted-bus locators");
    auto* t_cong = train_cmd->add_subcommand("congestion", "Congestion classifier");
    auto* t_solar = train_cmd->add_subcommand("solar", "Solar power from weather");
    auto* t_surr = train_cmd->add_subcommand("surrogate", "Subset penalty surrogate");
    for (auto* c : {t_type, t_loc, t_cong, t_solar, t_surr}) {
        c->add_option("--data", tr.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
        c->add_option("--seed", tr.seed, "Seed");
        c->add_option("--out", tr.out, "Output directory (default $GRIDSEER_OUT or ./runs)");
    }
    for (auto* c : {t_type, t_loc}) {
        c->add_option("--epochs", tr.epochs, "Maximum epochs")->check(CLI::PositiveNumber);
        c->add_flag("-v,--verbose", tr.verbose, "Per-epoch progress on stderr");
    }
    t_type->add_flag("--paper-mode", tr.paper_mode, "Two-class LL/LG head");
    t_loc->add_option("--kind", tr.kind, "Fault kind or 'all'");
    for (auto* c : {t_cong, t_solar}) add_grid_options(c, tr.grid);
    t_cong->add_option("--mode", tr.mode, "known | predicted");
    t_surr->add_option("--steps", tr.steps, "Adam steps")->check(CLI::PositiveNumber);

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    eval_cmd->add_option("--model", ev.model, "Checkpoint")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--data", ev.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--subset", ev.subset, "all | train | test");
    eval_cmd->add_option("--solar-model", ev.solar_model, "Solar checkpoint for PredictedPower congestion models");
    eval_cmd->add_option("--out", ev.out, "Output directory");
    add_grid_options(eval_cmd, ev.grid);

    SelectArgs se;
    auto* sel_cmd = app.add_subcommand("select", "Choose the solar subset for an hour");
    sel_cmd->add_option("--model", se.model, "Surrogate checkpoint")->required()->check(CLI::ExistingFile);
    sel_cmd->add_option("--weather", se.weather, "Hour description JSON")->required()->check(CLI::ExistingFile);
    sel_cmd->add_flag("--oracle", se.oracle, "Also rank every mask by simulation");
    sel_cmd->add_option("--out", se.out, "Output directory");
    add_grid_options(sel_cmd, se.grid);

    MonitorArgs mo;
    auto* mon_cmd = app.add_subcommand("monitor", "Classify a stream of voltage samples");
    mon_cmd->add_option("--fault-model", mo.fault_model, "FaultType checkpoint")->required()->check(CLI::ExistingFile);
    mon_cmd->add_option("--locator-models", mo.locator_dir, "Directory of locator_<Kind>.gsnn")
        ->required()
        ->check(CLI::ExistingDirectory);
    mon_cmd->add_option("--out", mo.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen_faults->parsed()) return cmd_gen_faults(gen);
        if (gen_subsets->parsed()) return cmd_gen_subsets(gen);
        if (t_type->parsed()) return cmd_train_fault_type(tr);
        if (t_loc->parsed()) return cmd_train_bus_locator(tr);
        if (t_cong->parsed()) return cmd_train_congestion(tr);
        if (t_solar->parsed()) return cmd_train_solar(tr);
        if (t_surr->parsed()) return cmd_train_surrogate(tr);
        if (eval_cmd->parsed()) return cmd_eval(ev);
        if (sel_cmd->parsed()) return cmd_select(se);
        if (mon_cmd->parsed()) return cmd_monitor(mo);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
