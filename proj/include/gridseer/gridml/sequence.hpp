#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "gridseer/common/error.hpp"
#include "gridseer/common/parallel.hpp"
#include "gridseer/common/rng.hpp"
#include "gridseer/faultsim/trace.hpp"
#include "gridseer/gridml/split.hpp"
#include "gridseer/nn/adam.hpp"
#include "gridseer/nn/dense.hpp"
#include "gridseer/nn/loss.hpp"
#include "gridseer/nn/lstm.hpp"
#include "gridseer/nn/model.hpp"
#include "gridseer/nn/standardize.hpp"

namespace gridseer::gridml {

/// LSTM -> dense ReLU -> softmax classifier over voltage traces. Layer
/// layout in ModelParams: input_mean, input_scale, Lstm, Dense(ReLU),
/// Dense(Softmax).
struct SequenceConfig {
    std::size_t lstm_hidden = 128;
    std::size_t dense_hidden = 64;
    std::size_t epochs = 30;
    std::size_t batch = 32;
    std::size_t patience = 5;
    double clip = 5.0;
    double test_fraction = 0.2;
    double val_fraction = 0.1;
    /// Fraction of training windows delayed by a random 0..max_shift steps,
    /// so the model also sees onsets late in the window as a streaming
    /// monitor does. Validation and test windows are never shifted.
    double shift_fraction = 0.5;
    std::size_t max_shift = 49;
    nn::AdamConfig adam;
};

inline nlohmann::json to_json(const SequenceConfig& c) {
    return {{"lstm_hidden", c.lstm_hidden}, {"dense_hidden", c.dense_hidden}, {"epochs", c.epochs},
            {"batch", c.batch},             {"patience", c.patience},         {"clip", c.clip},
            {"test_fraction", c.test_fraction}, {"val_fraction", c.val_fraction}, {"shift_fraction", c.shift_fraction},
            {"max_shift", c.max_shift},         {"lr", c.adam.lr}};
}

/// A labelled selection of traces. `strata` drives the stratified split.
struct SequenceTask {
    std::vector<const faultsim::VoltageTrace*> traces;
    std::vector<int> labels;
    std::vector<std::int64_t> strata;
    std::size_t num_classes = 0;
};

struct CurvePoint {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
    double test_acc = 0.0;
};

struct TrainedClassifier {
    nn::ModelParams model;
    Split split;
    std::vector<CurvePoint> curve;
    std::size_t best_epoch = 0;
    double train_acc = 0.0;
    double test_acc = 0.0;
};

using EpochCallback = std::function<void(const CurvePoint&)>;

inline constexpr std::size_t kInferenceBatch = 256;

/// Leading samples every trace holds before any fault onset.
inline constexpr std::size_t kPrefaultSteps = 10;

/// N x (T*B) input block, time-major: column t*B + j is trace j at step t.
/// With `shifts`, trace j is delayed by shifts[j] steps and its first steps
/// are filled by cycling through its prefault samples.
inline nn::Tensor2 batch_inputs(std::span<const faultsim::VoltageTrace* const> traces,
                                std::span<const std::size_t> idx, std::span<const std::size_t> shifts = {}) {
    if (idx.empty()) throw ShapeMismatch("empty batch");
    const auto* first = traces[idx[0]];
    const std::size_t T = first->steps, N = first->buses;
    const auto B = static_cast<Eigen::Index>(idx.size());
    nn::Tensor2 x(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(T) * B);
    for (Eigen::Index j = 0; j < B; ++j) {
        const auto* tr = traces[idx[static_cast<std::size_t>(j)]];
        if (tr->steps != T || tr->buses != N || tr->samples.size() != T * N)
            throw ShapeMismatch("traces in a batch must share dimensions");
        const std::size_t k = shifts.empty() ? 0 : shifts[static_cast<std::size_t>(j)];
        for (std::size_t t = 0; t < T; ++t) {
            const std::size_t src = t >= k ? t - k : t % kPrefaultSteps;
            for (std::size_t b = 0; b < N; ++b)
                x(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(t) * B + j) = tr->at(src, b);
        }
    }
    return x;
}

struct SequenceNet {
    nn::Standardizer stdz;
    nn::LstmParams lstm;
    nn::DenseParams hidden;
    nn::DenseParams out;

    static SequenceNet from_model(const nn::ModelParams& m) {
        return {nn::Standardizer::from_layers(m, 0), m.layer<nn::LstmParams>(2), m.layer<nn::DenseParams>(3),
                m.layer<nn::DenseParams>(4)};
    }

    void store(nn::ModelParams& m) const {
        m.layers.clear();
        stdz.append_to(m.layers);
        m.layers.emplace_back(lstm);
        m.layers.emplace_back(hidden);
        m.layers.emplace_back(out);
    }

    std::size_t steps_of(const nn::ModelParams& m) const { return m.metadata.at("steps").get<std::size_t>(); }

    /// Class probabilities, one column per example.
    nn::Tensor2 probabilities(nn::Tensor2 x, std::size_t steps) const {
        stdz.apply_inplace(x);
        const nn::Tensor2 h = nn::lstm_forward(lstm, std::move(x), steps);
        return nn::dense_forward(out, nn::dense_forward(hidden, h));
    }
};

inline void check_trace_dims(const nn::ModelParams& m, const faultsim::VoltageTrace& tr) {
    const auto T = m.metadata.at("steps").get<std::size_t>();
    const auto N = m.metadata.at("buses").get<std::size_t>();
    if (tr.steps != T || tr.buses != N || tr.samples.size() != T * N)
        throw ShapeMismatch("trace is " + std::to_string(tr.steps) + "x" + std::to_string(tr.buses) +
                            " but the model expects " + std::to_string(T) + "x" + std::to_string(N));
}

/// Class probabilities for a set of traces; batches run in parallel and are
/// merged in input order.
inline nn::Tensor2 predict_probabilities(const nn::ModelParams& m,
                                         std::span<const faultsim::VoltageTrace* const> traces,
                                         std::span<const std::size_t> idx, unsigned threads = 0) {
    const SequenceNet net = SequenceNet::from_model(m);
    const std::size_t steps = net.steps_of(m);
    for (std::size_t i : idx) check_trace_dims(m, *traces[i]);
    nn::Tensor2 probs(net.out.weights.rows(), static_cast<Eigen::Index>(idx.size()));
    const std::size_t nb = (idx.size() + kInferenceBatch - 1) / kInferenceBatch;
    parallel_for(
        nb,
        [&](std::size_t b) {
            const std::size_t lo = b * kInferenceBatch, hi = std::min(idx.size(), lo + kInferenceBatch);
            const auto p = net.probabilities(batch_inputs(traces, idx.subspan(lo, hi - lo)), steps);
            probs.middleCols(static_cast<Eigen::Index>(lo), p.cols()) = p;
        },
        threads);
    return probs;
}

inline std::vector<int> argmax_columns(const nn::Tensor2& p) {
    std::vector<int> out(static_cast<std::size_t>(p.cols()));
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
        Eigen::Index best = 0;
        p.col(c).maxCoeff(&best);
        out[static_cast<std::size_t>(c)] = static_cast<int>(best);
    }
    return out;
}

inline double accuracy_on(const nn::ModelParams& m, const SequenceTask& task, std::span<const std::size_t> idx) {
    if (idx.empty()) return 0.0;
    const auto pred = argmax_columns(predict_probabilities(m, task.traces, idx));
    std::size_t hit = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) hit += pred[k] == task.labels[idx[k]];
    return static_cast<double>(hit) / static_cast<double>(idx.size());
}

namespace detail {

/// Per-bus mean and scale over every sample of the training traces.
inline nn::Standardizer fit_bus_standardizer(const SequenceTask& task, std::span<const std::size_t> idx) {
    const std::size_t N = task.traces[idx[0]]->buses;
    std::vector<double> sum(N, 0.0), sq(N, 0.0);
    double count = 0.0;
    for (std::size_t i : idx) {
        const auto& tr = *task.traces[i];
        for (std::size_t t = 0; t < tr.steps; ++t)
            for (std::size_t b = 0; b < N; ++b) {
                const double v = tr.at(t, b);
                sum[b] += v;
                sq[b] += v * v;
            }
        count += static_cast<double>(tr.steps);
    }
    nn::Standardizer s{nn::Vector(static_cast<Eigen::Index>(N)), nn::Vector(static_cast<Eigen::Index>(N))};
    for (std::size_t b = 0; b < N; ++b) {
        const double mean = sum[b] / count;
        const double var = std::max(sq[b] / count - mean * mean, 0.0);
        s.mean(static_cast<Eigen::Index>(b)) = mean;
        s.scale(static_cast<Eigen::Index>(b)) = 1.0 / std::max(std::sqrt(var), 1e-6);
    }
    return s;
}

}  // namespace detail

/// Adam on mean softmax cross-entropy with global gradient clipping. Keeps
/// the parameters of the epoch with the best validation accuracy; stops
/// after `patience` epochs without improvement.
inline TrainedClassifier train_sequence_classifier(const SequenceTask& task, nn::ModelKind kind,
                                                   nlohmann::json metadata, const SequenceConfig& cfg,
                                                   std::uint64_t seed, const EpochCallback& on_epoch = {}) {
    if (task.traces.empty()) throw DegenerateLabels("no training traces");
    if (task.labels.size() != task.traces.size() || task.strata.size() != task.traces.size())
        throw ShapeMismatch("task labels/strata do not match traces");
    {
        std::vector<int> seen(task.num_classes, 0);
        std::size_t distinct = 0;
        for (int y : task.labels) {
            if (y < 0 || static_cast<std::size_t>(y) >= task.num_classes)
                throw ShapeMismatch("label out of range for the output layer");
            if (!seen[static_cast<std::size_t>(y)]++) ++distinct;
        }
        if (distinct < 2) throw DegenerateLabels("training data must contain at least two classes");
    }
    const std::size_t T = task.traces[0]->steps, N = task.traces[0]->buses;

    TrainedClassifier res;
    res.split = stratified_split(task.strata, derive_seed(seed, 0x73706c6974ULL), cfg.test_fraction,
                                 cfg.val_fraction);
    if (res.split.train.empty()) throw DegenerateLabels("split left no training traces");

    Rng rng(derive_seed(seed, 0x696e6974ULL));
    SequenceNet net;
    net.stdz = detail::fit_bus_standardizer(task, res.split.train);
    net.lstm = nn::LstmParams::random(N, cfg.lstm_hidden, rng);
    net.hidden = nn::DenseParams::random(cfg.lstm_hidden, cfg.dense_hidden, nn::Activation::ReLU, rng);
    net.out = nn::DenseParams::random(cfg.dense_hidden, task.num_classes, nn::Activation::Softmax, rng);

    nn::LstmGrads g_lstm(net.lstm);
    nn::DenseGrads g_hidden(net.hidden), g_out(net.out);
    const std::vector<nn::ParamRef> params{
        {nn::flat(net.lstm.weights), nn::flat(g_lstm.weights)},   {nn::flat(net.lstm.bias), nn::flat(g_lstm.bias)},
        {nn::flat(net.hidden.weights), nn::flat(g_hidden.weights)}, {nn::flat(net.hidden.bias), nn::flat(g_hidden.bias)},
        {nn::flat(net.out.weights), nn::flat(g_out.weights)},     {nn::flat(net.out.bias), nn::flat(g_out.bias)}};
    nn::AdamState adam(params, cfg.adam);

    res.model.kind = kind;
    metadata["steps"] = T;
    metadata["buses"] = N;
    metadata["num_classes"] = task.num_classes;
    metadata["seed"] = seed;
    metadata["config"] = to_json(cfg);
    res.model.metadata = std::move(metadata);

    const auto& val_idx = res.split.val.empty() ? res.split.train : res.split.val;
    double best_val = -1.0;
    SequenceNet best = net;
    Rng order_rng(derive_seed(seed, 0x6f72646572ULL));
    Rng shift_rng(derive_seed(seed, 0x7368696674ULL));
    std::vector<std::size_t> order = res.split.train;
    std::vector<std::size_t> shifts;
    if (cfg.shift_fraction > 0.0 && cfg.max_shift + 1 >= T) throw ValidationError("max_shift must leave at least one step of the window");

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        order_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t hits = 0;
        for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch) {
            const std::size_t hi = std::min(order.size(), lo + cfg.batch);
            const std::span<const std::size_t> bidx(order.data() + lo, hi - lo);
            shifts.assign(bidx.size(), 0);
            for (auto& k : shifts)
                if (shift_rng.uniform() < cfg.shift_fraction) k = shift_rng.index(cfg.max_shift + 1);
            nn::Tensor2 x = batch_inputs(task.traces, bidx, shifts);
            net.stdz.apply_inplace(x);
            std::vector<int> y(bidx.size());
            for (std::size_t k = 0; k < bidx.size(); ++k) y[k] = task.labels[bidx[k]];

            nn::LstmTape tape;
            const nn::Tensor2 h = nn::lstm_forward(net.lstm, std::move(x), T, &tape);
            const nn::Tensor2 a = nn::dense_forward(net.hidden, h);
            nn::Tensor2 logits = net.out.weights * a;
            logits.colwise() += net.out.bias;
            const auto loss = nn::softmax_xent(logits, y);
            loss_sum += loss.loss * static_cast<double>(bidx.size());
            const auto pred = argmax_columns(logits);
            for (std::size_t k = 0; k < y.size(); ++k) hits += pred[k] == y[k];

            nn::zero_grads(params);
            const nn::Tensor2 da = nn::dense_backward(net.out, a, logits, loss.grad, g_out);
            const nn::Tensor2 dh = nn::dense_backward(net.hidden, h, a, da, g_hidden);
            nn::lstm_backward(net.lstm, tape, dh, g_lstm);
            nn::clip_grad_norm(params, cfg.clip);
            nn::adam_update(adam, params);
        }
        net.store(res.model);
        CurvePoint cp;
        cp.epoch = epoch;
        cp.train_loss = loss_sum / static_cast<double>(order.size());
        cp.train_acc = static_cast<double>(hits) / static_cast<double>(order.size());
        cp.val_acc = accuracy_on(res.model, task, val_idx);
        cp.test_acc = accuracy_on(res.model, task, res.split.test);
        res.curve.push_back(cp);
        if (on_epoch) on_epoch(cp);
        if (cp.val_acc > best_val) {
            best_val = cp.val_acc;
            best = net;
            res.best_epoch = epoch;
        } else if (epoch - res.best_epoch >= cfg.patience) {
            break;
        }
    }
    best.store(res.model);
    res.model.metadata["best_epoch"] = res.best_epoch;
    res.model.metadata["epochs_run"] = res.curve.size();
    res.train_acc = accuracy_on(res.model, task, res.split.train);
    res.test_acc = res.curve[res.best_epoch - 1].test_acc;
    return res;
}

}  // namespace gridseer::gridml
