#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridseer/common/error.hpp"
#include "gridseer/common/rng.hpp"

namespace gridseer::nn {

/// Dense 2-D array of float64. Batched activations are stored one column per
/// example.
using Tensor2 = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Seeded uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) fill, column-major order.
inline void init_uniform(Tensor2& w, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-bound, bound);
}

inline void init_uniform(Vector& v, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(-bound, bound);
}

inline void require_shape(bool ok, const std::string& what) {
    if (!ok) throw ShapeMismatch(what);
}

inline bool all_finite(const Tensor2& t) { return t.allFinite(); }

/// Sigmoid with the argument clipped so exp never overflows.
inline double sigmoid(double z) {
    z = std::clamp(z, -40.0, 40.0);
    return 1.0 / (1.0 + std::exp(-z));
}

/// A trainable array and its gradient buffer, viewed flat.
struct ParamRef {
    std::span<double> value;
    std::span<double> grad;
};

template <typename M>
std::span<double> flat(M& m) {
    return {m.data(), static_cast<std::size_t>(m.size())};
}

inline double squared_norm(const std::vector<ParamRef>& ps) {
    double s = 0.0;
    for (const auto& p : ps)
        for (double g : p.grad) s += g * g;
    return s;
}

/// Rescales all gradients so their global L2 norm is at most max_norm.
/// Returns the norm before clipping.
inline double clip_grad_norm(const std::vector<ParamRef>& ps, double max_norm) {
    const double norm = std::sqrt(squared_norm(ps));
    if (norm > max_norm && norm > 0.0) {
        const double f = max_norm / norm;
        for (const auto& p : ps)
            for (double& g : p.grad) g *= f;
    }
    return norm;
}

inline void zero_grads(const std::vector<ParamRef>& ps) {
    for (const auto& p : ps) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

}  // namespace gridseer::nn
