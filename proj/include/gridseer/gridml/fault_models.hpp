#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridseer/faultsim/dataset.hpp"
#include "gridseer/gridml/sequence.hpp"
#include "gridseer/nn/svm.hpp"

namespace gridseer::gridml {

struct FaultModelConfig {
    SequenceConfig seq;
    /// Output layer of size 2 over LL/LG traces only, as in the original
    /// experiment; the default head separates all four kinds.
    bool paper_mode = false;
    /// NoFault traces given to each locator. Locator k takes the k-th
    /// disjoint block of the dataset's NoFault traces.
    std::size_t nofault_per_locator = 500;
};

/// Class index -> fault kind for a fault-type head.
inline std::vector<faultsim::FaultKind> fault_type_classes(bool paper_mode) {
    using faultsim::FaultKind;
    if (paper_mode) return {FaultKind::LineLine, FaultKind::LineGround};
    return {faultsim::kAllFaultKinds.begin(), faultsim::kAllFaultKinds.end()};
}

inline std::int64_t stratum_of(const faultsim::VoltageTrace& tr) {
    return static_cast<std::int64_t>(static_cast<int>(tr.label_kind) + 1) * 1000 + tr.label_bus;
}

/// Faulted traces labelled by kind (NoFault traces are not part of this task).
inline SequenceTask fault_type_task(const faultsim::FaultDataset& ds, bool paper_mode) {
    const auto classes = fault_type_classes(paper_mode);
    SequenceTask task;
    task.num_classes = classes.size();
    for (const auto& tr : ds.traces) {
        for (std::size_t c = 0; c < classes.size(); ++c) {
            if (tr.label_kind == faultsim::trace_kind(classes[c])) {
                task.traces.push_back(&tr);
                task.labels.push_back(static_cast<int>(c));
                task.strata.push_back(stratum_of(tr));
            }
        }
    }
    return task;
}

/// Traces of one kind labelled by bus, plus a block of NoFault traces
/// labelled 0.
inline SequenceTask locator_task(const faultsim::FaultDataset& ds, faultsim::FaultKind kind,
                                 std::size_t nofault_per_locator) {
    SequenceTask task;
    task.num_classes = ds.buses + 1;
    const auto k = static_cast<std::size_t>(kind);
    std::size_t nofault_seen = 0;
    for (const auto& tr : ds.traces) {
        bool take = false;
        if (tr.label_kind == faultsim::trace_kind(kind)) {
            take = true;
        } else if (tr.label_kind == faultsim::TraceKind::NoFault) {
            take = nofault_seen / nofault_per_locator == k;
            ++nofault_seen;
        }
        if (!take) continue;
        task.traces.push_back(&tr);
        task.labels.push_back(tr.label_kind == faultsim::TraceKind::NoFault ? 0 : tr.label_bus);
        task.strata.push_back(stratum_of(tr));
    }
    return task;
}

inline TrainedClassifier train_fault_type_model(const faultsim::FaultDataset& ds, const FaultModelConfig& cfg,
                                                std::uint64_t seed, const EpochCallback& on_epoch = {}) {
    const SequenceTask task = fault_type_task(ds, cfg.paper_mode);
    nlohmann::json classes = nlohmann::json::array();
    for (auto k : fault_type_classes(cfg.paper_mode)) classes.push_back(std::string(to_string(k)));
    nlohmann::json meta{{"task", "fault-type"}, {"paper_mode", cfg.paper_mode}, {"class_labels", classes},
                        {"dataset_seed", ds.seed}, {"grid_hash", ds.grid_hash}};
    return train_sequence_classifier(task, nn::ModelKind::FaultType, std::move(meta), cfg.seq, seed, on_epoch);
}

inline TrainedClassifier train_bus_locator(const faultsim::FaultDataset& ds, faultsim::FaultKind kind,
                                           const FaultModelConfig& cfg, std::uint64_t seed,
                                           const EpochCallback& on_epoch = {}) {
    const SequenceTask task = locator_task(ds, kind, cfg.nofault_per_locator);
    nlohmann::json meta{{"task", "bus-locator"},
                        {"fault_kind", std::string(to_string(kind))},
                        {"nofault_per_locator", cfg.nofault_per_locator},
                        {"dataset_seed", ds.seed},
                        {"grid_hash", ds.grid_hash}};
    return train_sequence_classifier(task, nn::ModelKind::BusLocator, std::move(meta), cfg.seq, seed, on_epoch);
}

/// Rebuilds the labelled task a trained sequence model was fitted on.
inline SequenceTask task_for_model(const nn::ModelParams& m, const faultsim::FaultDataset& ds) {
    const auto task = m.metadata.at("task").get<std::string>();
    if (task == "fault-type") return fault_type_task(ds, m.metadata.at("paper_mode").get<bool>());
    if (task == "bus-locator") {
        const auto kind = faultsim::parse_fault_kind(m.metadata.at("fault_kind").get<std::string>());
        if (!kind) throw ParseError("model metadata names an unknown fault kind");
        return locator_task(ds, *kind, m.metadata.at("nofault_per_locator").get<std::size_t>());
    }
    throw ShapeMismatch("model task '" + task + "' is not a trace classifier");
}

struct FaultTypePrediction {
    faultsim::FaultKind kind;
    std::vector<double> probabilities;
};

inline FaultTypePrediction classify_fault_type(const nn::ModelParams& m, const faultsim::VoltageTrace& trace) {
    if (m.kind != nn::ModelKind::FaultType) throw ShapeMismatch("classify_fault_type needs a FaultType model");
    check_trace_dims(m, trace);
    const std::array<const faultsim::VoltageTrace*, 1> one{&trace};
    const std::array<std::size_t, 1> idx{0};
    const nn::Tensor2 p = predict_probabilities(m, one, idx, 1);
    const auto classes = fault_type_classes(m.metadata.at("paper_mode").get<bool>());
    FaultTypePrediction out{classes[static_cast<std::size_t>(argmax_columns(p)[0])], {}};
    out.probabilities.assign(p.data(), p.data() + p.size());
    return out;
}

struct BusPrediction {
    int bus = 0;  ///< 0 = no fault
    std::vector<double> probabilities;
};

inline BusPrediction locate_fault(const nn::ModelParams& m, const faultsim::VoltageTrace& trace) {
    if (m.kind != nn::ModelKind::BusLocator) throw ShapeMismatch("locate_fault needs a BusLocator model");
    check_trace_dims(m, trace);
    const std::array<const faultsim::VoltageTrace*, 1> one{&trace};
    const std::array<std::size_t, 1> idx{0};
    const nn::Tensor2 p = predict_probabilities(m, one, idx, 1);
    BusPrediction out{argmax_columns(p)[0], {}};
    out.probabilities.assign(p.data(), p.data() + p.size());
    return out;
}

/// Flattened T*N magnitudes, one column per selected trace.
inline nn::Tensor2 flat_features(const SequenceTask& task, std::span<const std::size_t> idx) {
    const std::size_t d = task.traces[idx[0]]->samples.size();
    nn::Tensor2 x(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto& s = task.traces[idx[k]]->samples;
        if (s.size() != d) throw ShapeMismatch("traces differ in size");
        x.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const nn::Vector>(s.data(), static_cast<Eigen::Index>(d));
    }
    return x;
}

struct BaselineResult {
    nn::ModelParams model;
    double train_acc = 0.0;
    double test_acc = 0.0;
};

/// Linear SVM on the same split as a trained sequence model (its train and
/// validation parts form the SVM training set).
inline BaselineResult train_svm_baseline(const SequenceTask& task, const Split& split, std::uint64_t seed,
                                         const nn::SvmConfig& cfg = {}) {
    std::vector<std::size_t> train = split.train;
    train.insert(train.end(), split.val.begin(), split.val.end());
    std::sort(train.begin(), train.end());
    std::vector<int> y;
    for (std::size_t i : train) y.push_back(task.labels[i]);
    BaselineResult r;
    r.model = nn::svm_train(flat_features(task, train), y, seed, cfg);
    auto acc = [&](const std::vector<std::size_t>& idx) {
        if (idx.empty()) return 0.0;
        const auto pred = nn::svm_predict(r.model, flat_features(task, idx));
        std::size_t hit = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) hit += pred[k] == task.labels[idx[k]];
        return static_cast<double>(hit) / static_cast<double>(idx.size());
    };
    r.train_acc = acc(train);
    r.test_acc = acc(split.test);
    return r;
}

}  // namespace gridseer::gridml
