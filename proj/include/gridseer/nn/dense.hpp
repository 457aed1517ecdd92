#pragma once

#include <string>
#include <string_view>

#include "gridseer/nn/tensor.hpp"

namespace gridseer::nn {

enum class Activation { Identity, ReLU, Softmax, Sigmoid };

inline std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::Identity: return "Identity";
        case Activation::ReLU: return "ReLU";
        case Activation::Softmax: return "Softmax";
        case Activation::Sigmoid: return "Sigmoid";
    }
    return "?";
}

inline Activation parse_activation(std::string_view s) {
    for (auto a : {Activation::Identity, Activation::ReLU, Activation::Softmax, Activation::Sigmoid})
        if (to_string(a) == s) return a;
    throw ShapeMismatch("unknown activation " + std::string(s));
}

struct DenseParams {
    Tensor2 weights;  ///< out x in
    Vector bias;      ///< out
    Activation activation = Activation::Identity;

    DenseParams() = default;
    DenseParams(std::size_t in, std::size_t out, Activation act)
        : weights(Tensor2::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in))),
          bias(Vector::Zero(static_cast<Eigen::Index>(out))),
          activation(act) {}

    static DenseParams random(std::size_t in, std::size_t out, Activation act, Rng& rng) {
        DenseParams p(in, out, act);
        init_uniform(p.weights, in, rng);
        init_uniform(p.bias, in, rng);
        return p;
    }

    std::size_t in_dim() const { return static_cast<std::size_t>(weights.cols()); }
    std::size_t out_dim() const { return static_cast<std::size_t>(weights.rows()); }

    bool operator==(const DenseParams& o) const {
        return activation == o.activation && weights == o.weights && bias == o.bias;
    }
};

struct DenseGrads {
    Tensor2 weights;
    Vector bias;
    explicit DenseGrads(const DenseParams& p)
        : weights(Tensor2::Zero(p.weights.rows(), p.weights.cols())), bias(Vector::Zero(p.bias.size())) {}
};

/// Column-wise softmax with max subtraction.
inline Tensor2 softmax(const Tensor2& logits) {
    Tensor2 out(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const double m = logits.col(c).maxCoeff();
        const Eigen::ArrayXd e = (logits.col(c).array() - m).exp();
        out.col(c) = (e / e.sum()).matrix();
    }
    return out;
}

inline Tensor2 apply_activation(Tensor2 z, Activation a) {
    switch (a) {
        case Activation::Identity: return z;
        case Activation::ReLU: return z.cwiseMax(0.0);
        case Activation::Softmax: return softmax(z);
        case Activation::Sigmoid: return z.unaryExpr([](double v) { return sigmoid(v); });
    }
    return z;
}

/// x is in x B; returns out x B after the activation.
inline Tensor2 dense_forward(const DenseParams& p, const Tensor2& x) {
    require_shape(p.bias.size() == p.weights.rows(), "DenseParams bias length does not match weights");
    require_shape(x.rows() == p.weights.cols(),
                  "dense_forward expects " + std::to_string(p.weights.cols()) + " inputs, got " +
                      std::to_string(x.rows()));
    Tensor2 z = p.weights * x;
    z.colwise() += p.bias;
    return apply_activation(std::move(z), p.activation);
}

/// Backward through one layer given its input x, its output y and dL/dy.
/// Softmax layers expect the gradient with respect to their logits instead
/// (the usual fused softmax/cross-entropy gradient); the same holds for
/// Sigmoid paired with binary cross-entropy.
inline Tensor2 dense_backward(const DenseParams& p, const Tensor2& x, const Tensor2& y, Tensor2 dy,
                              DenseGrads& grads) {
    if (p.activation == Activation::ReLU) dy = (y.array() > 0.0).select(dy, 0.0);
    grads.weights.noalias() += dy * x.transpose();
    grads.bias += dy.rowwise().sum();
    return p.weights.transpose() * dy;
}

}  // namespace gridseer::nn
