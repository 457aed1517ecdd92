#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "gridseer/nn/dense.hpp"

namespace gridseer::nn {

struct LossResult {
    double loss = 0.0;
    Tensor2 grad;  ///< same shape as the prediction/logits
};

/// Mean cross-entropy over the batch; `labels[b]` indexes the row of column b.
inline LossResult softmax_xent(const Tensor2& logits, std::span<const int> labels) {
    require_shape(static_cast<std::size_t>(logits.cols()) == labels.size(), "softmax_xent label count mismatch");
    const Tensor2 prob = softmax(logits);
    LossResult r{0.0, prob};
    const double inv_b = 1.0 / static_cast<double>(labels.size());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const int y = labels[static_cast<std::size_t>(c)];
        require_shape(y >= 0 && y < logits.rows(), "softmax_xent label out of range");
        const double m = logits.col(c).maxCoeff();
        const double lse = m + std::log((logits.col(c).array() - m).exp().sum());
        r.loss += (lse - logits(y, c)) * inv_b;
        r.grad(y, c) -= 1.0;
    }
    r.grad *= inv_b;
    return r;
}

/// Mean squared error over all entries.
inline LossResult mse(const Tensor2& pred, const Tensor2& target) {
    require_shape(pred.rows() == target.rows() && pred.cols() == target.cols(), "mse shape mismatch");
    const double n = static_cast<double>(pred.size());
    const Tensor2 diff = pred - target;
    return {diff.squaredNorm() / n, diff * (2.0 / n)};
}

/// Mean binary cross-entropy on logits (1 x B), numerically stable form.
inline LossResult sigmoid_bce(const Tensor2& logits, std::span<const double> targets) {
    require_shape(logits.rows() == 1 && static_cast<std::size_t>(logits.cols()) == targets.size(),
                  "sigmoid_bce shape mismatch");
    const double inv_b = 1.0 / static_cast<double>(targets.size());
    LossResult r{0.0, Tensor2(1, logits.cols())};
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const double z = logits(0, c), y = targets[static_cast<std::size_t>(c)];
        r.loss += (std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)))) * inv_b;
        r.grad(0, c) = (sigmoid(z) - y) * inv_b;
    }
    return r;
}

}  // namespace gridseer::nn
