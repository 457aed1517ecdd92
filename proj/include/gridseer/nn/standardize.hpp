#pragma once

#include <algorithm>
#include <cmath>

#include "gridseer/nn/model.hpp"

namespace gridseer::nn {

/// Per-feature affine map x -> (x - mean) * scale, fitted on training data.
struct Standardizer {
    Vector mean;
    Vector scale;

    /// Features are rows; every column of `x` is one observation.
    static Standardizer fit(const Tensor2& x, double min_std = 1e-6) {
        Standardizer s;
        const double n = static_cast<double>(x.cols());
        s.mean = x.rowwise().sum() / n;
        s.scale.resize(x.rows());
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const double var = (x.row(r).array() - s.mean(r)).square().sum() / n;
            s.scale(r) = 1.0 / std::max(std::sqrt(var), min_std);
        }
        return s;
    }

    static Standardizer identity(Eigen::Index dim) { return {Vector::Zero(dim), Vector::Ones(dim)}; }

    Tensor2 apply(const Tensor2& x) const {
        require_shape(x.rows() == mean.size(), "standardizer dimension mismatch");
        return ((x.colwise() - mean).array().colwise() * scale.array()).matrix();
    }

    void apply_inplace(Tensor2& x) const {
        require_shape(x.rows() == mean.size(), "standardizer dimension mismatch");
        x.colwise() -= mean;
        x.array().colwise() *= scale.array();
    }

    void append_to(std::vector<Layer>& layers) const {
        layers.emplace_back(WeightVector{"input_mean", mean});
        layers.emplace_back(WeightVector{"input_scale", scale});
    }

    static Standardizer from_layers(const ModelParams& m, std::size_t first) {
        const auto& mu = m.layer<WeightVector>(first);
        const auto& sc = m.layer<WeightVector>(first + 1);
        if (mu.name != "input_mean" || sc.name != "input_scale" || mu.values.size() != sc.values.size())
            throw ShapeMismatch("model is missing its input standardization");
        return {mu.values, sc.values};
    }
};

}  // namespace gridseer::nn
