#pragma once

#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <vector>

#include "gridseer/common/rng.hpp"
#include "gridseer/nn/model.hpp"
#include "gridseer/nn/standardize.hpp"

namespace gridseer::nn {

struct SvmConfig {
    double lambda = 1e-4;
    std::size_t epochs = 10;
};

/// One-vs-rest linear SVM trained by Pegasos subgradient steps on the
/// L2-regularized hinge loss. `features` holds one example per column; the
/// model stores the standardization it fitted, followed by a C x D Identity
/// layer of class scores.
inline ModelParams svm_train(const Tensor2& features, std::span<const int> labels, std::uint64_t seed,
                             const SvmConfig& cfg = {}) {
    require_shape(static_cast<std::size_t>(features.cols()) == labels.size(), "svm_train label count mismatch");
    require_shape(features.allFinite(), "svm_train features must be finite");
    const std::set<int> classes(labels.begin(), labels.end());
    if (classes.size() < 2) throw DegenerateLabels("svm_train needs at least two classes");
    if (*classes.begin() < 0) throw DegenerateLabels("svm_train labels must be non-negative");
    const int num_classes = *classes.rbegin() + 1;

    const Standardizer stdz = Standardizer::fit(features);
    const Tensor2 x = stdz.apply(features);
    const Eigen::Index d = x.rows();
    const std::size_t n = labels.size();

    DenseParams scores(static_cast<std::size_t>(d), static_cast<std::size_t>(num_classes), Activation::Identity);
    Rng rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::vector<std::size_t>> epoch_orders;
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        rng.shuffle(order);
        epoch_orders.push_back(order);
    }

    for (int c = 0; c < num_classes; ++c) {
        // bias handled as a regularized weight on a constant feature
        Vector w = Vector::Zero(d);
        double b = 0.0;
        std::uint64_t t = 0;
        for (const auto& ord : epoch_orders) {
            for (std::size_t i : ord) {
                ++t;
                const double eta = 1.0 / (cfg.lambda * static_cast<double>(t));
                const double y = labels[i] == c ? 1.0 : -1.0;
                const double margin = y * (w.dot(x.col(static_cast<Eigen::Index>(i))) + b);
                const double shrink = 1.0 - eta * cfg.lambda;
                w *= shrink;
                b *= shrink;
                if (margin < 1.0) {
                    w += (eta * y) * x.col(static_cast<Eigen::Index>(i));
                    b += eta * y;
                }
            }
        }
        scores.weights.row(c) = w.transpose();
        scores.bias(c) = b;
    }

    ModelParams m;
    m.kind = ModelKind::SvmBaseline;
    stdz.append_to(m.layers);
    m.layers.emplace_back(std::move(scores));
    m.metadata = {{"seed", seed}, {"epochs", cfg.epochs}, {"lambda", cfg.lambda}, {"classes", num_classes}};
    return m;
}

inline std::vector<int> svm_predict(const ModelParams& m, const Tensor2& features) {
    if (m.kind != ModelKind::SvmBaseline) throw ShapeMismatch("svm_predict needs an SvmBaseline model");
    const auto stdz = Standardizer::from_layers(m, 0);
    const auto& scores = m.layer<DenseParams>(2);
    const Tensor2 s = dense_forward(scores, stdz.apply(features));
    std::vector<int> out(static_cast<std::size_t>(s.cols()));
    for (Eigen::Index c = 0; c < s.cols(); ++c) {
        Eigen::Index best = 0;
        s.col(c).maxCoeff(&best);
        out[static_cast<std::size_t>(c)] = static_cast<int>(best);
    }
    return out;
}

}  // namespace gridseer::nn
