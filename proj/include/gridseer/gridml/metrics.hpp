#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridseer/common/error.hpp"
#include "gridseer/gridml/fault_models.hpp"

namespace gridseer::gridml {

struct Metrics {
    std::size_t total = 0;
    double accuracy = 0.0;
    std::vector<std::vector<std::size_t>> confusion;  ///< [true][predicted]
    std::vector<std::size_t> support;
    std::vector<double> precision;
    std::vector<double> recall;
};

inline Metrics compute_metrics(std::span<const int> labels, std::span<const int> predicted, std::size_t classes) {
    if (labels.size() != predicted.size()) throw ShapeMismatch("label and prediction counts differ");
    Metrics m;
    m.total = labels.size();
    m.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || predicted[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes ||
            static_cast<std::size_t>(predicted[i]) >= classes)
            throw ShapeMismatch("class index out of range");
        ++m.confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(predicted[i])];
    }
    std::size_t diag = 0;
    m.support.assign(classes, 0);
    m.precision.assign(classes, 0.0);
    m.recall.assign(classes, 0.0);
    for (std::size_t c = 0; c < classes; ++c) {
        diag += m.confusion[c][c];
        std::size_t col = 0;
        for (std::size_t r = 0; r < classes; ++r) {
            m.support[c] += m.confusion[c][r];
            col += m.confusion[r][c];
        }
        if (col) m.precision[c] = static_cast<double>(m.confusion[c][c]) / static_cast<double>(col);
        if (m.support[c]) m.recall[c] = static_cast<double>(m.confusion[c][c]) / static_cast<double>(m.support[c]);
    }
    m.accuracy = m.total ? static_cast<double>(diag) / static_cast<double>(m.total) : 0.0;
    return m;
}

inline nlohmann::json to_json(const Metrics& m, const std::vector<std::string>& class_labels = {}) {
    nlohmann::json j{{"total", m.total},         {"accuracy", m.accuracy}, {"confusion", m.confusion},
                     {"support", m.support},     {"precision", m.precision}, {"recall", m.recall}};
    if (!class_labels.empty()) j["class_labels"] = class_labels;
    return j;
}

enum class EvalSubset { All, Train, Test };

inline std::vector<std::string> class_labels_of(const nn::ModelParams& m) {
    std::vector<std::string> out;
    if (m.metadata.contains("class_labels"))
        for (const auto& s : m.metadata.at("class_labels")) out.push_back(s.get<std::string>());
    else
        for (std::size_t c = 0; c < m.metadata.at("num_classes").get<std::size_t>(); ++c)
            out.push_back(c == 0 ? "healthy" : "bus " + std::to_string(c));
    return out;
}

/// Metrics of a trace classifier on the traces of `ds` its task covers; the
/// Train/Test subsets rebuild the split recorded in the model metadata.
inline Metrics evaluate(const nn::ModelParams& m, const faultsim::FaultDataset& ds,
                        EvalSubset subset = EvalSubset::All) {
    const SequenceTask task = task_for_model(m, ds);
    if (task.traces.empty()) throw ShapeMismatch("dataset has no traces for this model's task");
    std::vector<std::size_t> idx;
    if (subset == EvalSubset::All) {
        idx.resize(task.traces.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    } else {
        const auto& cfg = m.metadata.at("config");
        const auto seed = m.metadata.at("seed").get<std::uint64_t>();
        const Split s = stratified_split(task.strata, derive_seed(seed, 0x73706c6974ULL),
                                         cfg.at("test_fraction").get<double>(), cfg.at("val_fraction").get<double>());
        idx = subset == EvalSubset::Test ? s.test : s.train;
    }
    const auto pred = argmax_columns(predict_probabilities(m, task.traces, idx));
    std::vector<int> labels;
    for (std::size_t i : idx) labels.push_back(task.labels[i]);
    return compute_metrics(labels, pred, task.num_classes);
}

inline std::string curve_csv(const std::vector<CurvePoint>& curve) {
    std::string out = "epoch,train_acc,test_acc,val_acc,train_loss\n";
    char buf[160];
    for (const auto& p : curve) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.9f\n", p.epoch, p.train_acc, p.test_acc, p.val_acc,
                      p.train_loss);
        out += buf;
    }
    return out;
}

}  // namespace gridseer::gridml
