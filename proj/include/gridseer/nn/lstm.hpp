#pragma once

#include <utility>
#include <vector>

#include "gridseer/nn/tensor.hpp"

namespace gridseer::nn {

/// LSTM cell weights. The four gate matrices are stacked row-wise in the
/// order input, forget, output, candidate; each block is
/// hidden x (input + hidden) acting on [x; h].
struct LstmParams {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    Tensor2 weights;  ///< 4H x (I + H)
    Vector bias;      ///< 4H

    LstmParams() = default;
    LstmParams(std::size_t input, std::size_t hidden)
        : input_dim(input),
          hidden_dim(hidden),
          weights(Tensor2::Zero(static_cast<Eigen::Index>(4 * hidden), static_cast<Eigen::Index>(input + hidden))),
          bias(Vector::Zero(static_cast<Eigen::Index>(4 * hidden))) {}

    static LstmParams random(std::size_t input, std::size_t hidden, Rng& rng) {
        LstmParams p(input, hidden);
        init_uniform(p.weights, input + hidden, rng);
        init_uniform(p.bias, input + hidden, rng);
        return p;
    }

    enum Gate { kInput = 0, kForget = 1, kOutput = 2, kCandidate = 3 };

    auto gate_weights(Gate g) const {
        return weights.middleRows(static_cast<Eigen::Index>(g * hidden_dim), static_cast<Eigen::Index>(hidden_dim));
    }
    auto gate_bias(Gate g) const {
        return bias.segment(static_cast<Eigen::Index>(g * hidden_dim), static_cast<Eigen::Index>(hidden_dim));
    }

    void check() const {
        const auto h4 = static_cast<Eigen::Index>(4 * hidden_dim);
        require_shape(weights.rows() == h4 && weights.cols() == static_cast<Eigen::Index>(input_dim + hidden_dim) &&
                          bias.size() == h4,
                      "LstmParams shapes inconsistent");
    }

    bool operator==(const LstmParams& o) const {
        return input_dim == o.input_dim && hidden_dim == o.hidden_dim && weights == o.weights && bias == o.bias;
    }
};

struct LstmGrads {
    Tensor2 weights;
    Vector bias;
    explicit LstmGrads(const LstmParams& p)
        : weights(Tensor2::Zero(p.weights.rows(), p.weights.cols())), bias(Vector::Zero(p.bias.size())) {}
};

namespace detail {

/// Applies gate nonlinearities in place to a 4H x B pre-activation block.
inline void activate_gates(Tensor2& z, Eigen::Index h) {
    z.topRows(3 * h) = z.topRows(3 * h).unaryExpr([](double v) { return sigmoid(v); });
    z.bottomRows(h) = z.bottomRows(h).array().tanh();
}

}  // namespace detail

/// One cell application on a batch: x is I x B, h and c are H x B.
inline std::pair<Tensor2, Tensor2> lstm_step(const LstmParams& p, const Tensor2& x, const Tensor2& h,
                                             const Tensor2& c) {
    p.check();
    const auto H = static_cast<Eigen::Index>(p.hidden_dim);
    const auto I = static_cast<Eigen::Index>(p.input_dim);
    require_shape(x.rows() == I && h.rows() == H && c.rows() == H && x.cols() == h.cols() && h.cols() == c.cols(),
                  "lstm_step input dimensions do not match params");
    Tensor2 z = p.weights.leftCols(I) * x + p.weights.rightCols(H) * h;
    z.colwise() += p.bias;
    detail::activate_gates(z, H);
    Tensor2 c_next = z.middleRows(H, H).cwiseProduct(c) + z.topRows(H).cwiseProduct(z.bottomRows(H));
    Tensor2 h_next = z.middleRows(2 * H, H).cwiseProduct(c_next.array().tanh().matrix());
    return {std::move(h_next), std::move(c_next)};
}

/// Everything the backward pass needs from a batched unroll.
struct LstmTape {
    std::size_t steps = 0;
    Eigen::Index batch = 0;
    Tensor2 inputs;              ///< I x (T*B), step t occupies columns [t*B, (t+1)*B)
    std::vector<Tensor2> gates;  ///< per step, 4H x B post-activation
    std::vector<Tensor2> cells;  ///< c_0 .. c_T (c_0 = 0)
    std::vector<Tensor2> hiddens;///< h_0 .. h_T
};

/// Unrolls the cell over a sequence from zero state. `inputs` is
/// I x (T*B) with time-major column blocks. Returns the final hidden state.
inline Tensor2 lstm_forward(const LstmParams& p, Tensor2 inputs, std::size_t steps, LstmTape* tape = nullptr) {
    p.check();
    const auto H = static_cast<Eigen::Index>(p.hidden_dim);
    const auto I = static_cast<Eigen::Index>(p.input_dim);
    require_shape(inputs.rows() == I, "lstm_forward input rows do not match input_dim");
    require_shape(steps >= 1 && inputs.cols() % static_cast<Eigen::Index>(steps) == 0,
                  "lstm_forward input columns are not a whole number of steps");
    const Eigen::Index B = inputs.cols() / static_cast<Eigen::Index>(steps);

    Tensor2 zx = p.weights.leftCols(I) * inputs;  // all steps at once
    zx.colwise() += p.bias;

    Tensor2 h = Tensor2::Zero(H, B), c = Tensor2::Zero(H, B);
    if (tape) {
        tape->steps = steps;
        tape->batch = B;
        tape->gates.clear();
        tape->cells.assign(1, c);
        tape->hiddens.assign(1, h);
        tape->gates.reserve(steps);
        tape->cells.reserve(steps + 1);
        tape->hiddens.reserve(steps + 1);
    }
    const auto wh = p.weights.rightCols(H);
    for (std::size_t t = 0; t < steps; ++t) {
        Tensor2 z = zx.middleCols(static_cast<Eigen::Index>(t) * B, B);
        z.noalias() += wh * h;
        detail::activate_gates(z, H);
        c = z.middleRows(H, H).cwiseProduct(c) + z.topRows(H).cwiseProduct(z.bottomRows(H));
        h = z.middleRows(2 * H, H).cwiseProduct(c.array().tanh().matrix());
        if (tape) {
            tape->gates.push_back(std::move(z));
            tape->cells.push_back(c);
            tape->hiddens.push_back(h);
        }
    }
    if (tape) tape->inputs = std::move(inputs);
    return h;
}

/// Backpropagation through time from dL/dh_T. Accumulates into `grads` and
/// returns dL/dinputs (I x T*B) when `input_grad` is requested.
inline void lstm_backward(const LstmParams& p, const LstmTape& tape, const Tensor2& dh_final, LstmGrads& grads,
                          Tensor2* input_grad = nullptr) {
    const auto H = static_cast<Eigen::Index>(p.hidden_dim);
    const auto I = static_cast<Eigen::Index>(p.input_dim);
    const Eigen::Index B = tape.batch;
    const auto T = static_cast<Eigen::Index>(tape.steps);
    require_shape(dh_final.rows() == H && dh_final.cols() == B, "lstm_backward gradient shape mismatch");

    Tensor2 dz_all(4 * H, T * B);
    Tensor2 dh = dh_final;
    Tensor2 dc = Tensor2::Zero(H, B);
    const auto wh = p.weights.rightCols(H);
    Tensor2 dwh = Tensor2::Zero(4 * H, H);

    for (Eigen::Index t = T - 1; t >= 0; --t) {
        const Tensor2& g = tape.gates[static_cast<std::size_t>(t)];
        const Tensor2& c_prev = tape.cells[static_cast<std::size_t>(t)];
        const Tensor2& c_cur = tape.cells[static_cast<std::size_t>(t + 1)];
        const auto gi = g.topRows(H).array();
        const auto gf = g.middleRows(H, H).array();
        const auto go = g.middleRows(2 * H, H).array();
        const auto gg = g.bottomRows(H).array();
        const Eigen::ArrayXXd tc = c_cur.array().tanh();

        dc.array() += dh.array() * go * (1.0 - tc.square());
        auto dz = dz_all.middleCols(t * B, B);
        dz.topRows(H).array() = dc.array() * gg * gi * (1.0 - gi);
        dz.middleRows(H, H).array() = dc.array() * c_prev.array() * gf * (1.0 - gf);
        dz.middleRows(2 * H, H).array() = dh.array() * tc * go * (1.0 - go);
        dz.bottomRows(H).array() = dc.array() * gi * (1.0 - gg.square());

        dwh.noalias() += dz * tape.hiddens[static_cast<std::size_t>(t)].transpose();
        dh.noalias() = wh.transpose() * dz;
        dc.array() *= gf;
    }
    grads.weights.leftCols(I).noalias() += dz_all * tape.inputs.transpose();
    grads.weights.rightCols(H) += dwh;
    grads.bias += dz_all.rowwise().sum();
    if (input_grad) *input_grad = p.weights.leftCols(I).transpose() * dz_all;
}

}  // namespace gridseer::nn
