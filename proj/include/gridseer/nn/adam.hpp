#pragma once

#include <cmath>
#include <vector>

#include "gridseer/nn/tensor.hpp"

namespace gridseer::nn {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamConfig config;
    std::size_t step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    AdamState() = default;
    explicit AdamState(const std::vector<ParamRef>& params, AdamConfig cfg = {}) : config(cfg) {
        for (const auto& p : params) {
            m.emplace_back(p.value.size(), 0.0);
            v.emplace_back(p.value.size(), 0.0);
        }
    }
};

/// Bias-corrected Adam step over every parameter, reading each ParamRef's
/// gradient buffer.
inline void adam_update(AdamState& st, const std::vector<ParamRef>& params) {
    require_shape(params.size() == st.m.size(), "adam_update parameter count mismatch");
    for (std::size_t k = 0; k < params.size(); ++k)
        require_shape(params[k].value.size() == st.m[k].size() && params[k].grad.size() == st.m[k].size(),
                      "adam_update parameter shape mismatch");
    ++st.step;
    const auto& c = st.config;
    const double t = static_cast<double>(st.step);
    const double bc1 = 1.0 - std::pow(c.beta1, t);
    const double bc2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& m = st.m[k];
        auto& v = st.v[k];
        const auto& p = params[k];
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double g = p.grad[i];
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p.value[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
        }
    }
}

}  // namespace gridseer::nn
