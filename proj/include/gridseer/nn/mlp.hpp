#pragma once

#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "gridseer/common/rng.hpp"
#include "gridseer/nn/adam.hpp"
#include "gridseer/nn/dense.hpp"
#include "gridseer/nn/loss.hpp"
#include "gridseer/nn/model.hpp"
#include "gridseer/nn/standardize.hpp"

namespace gridseer::nn {

/// One-hidden-layer perceptron with built-in input standardization. Layer
/// layout in ModelParams: input_mean, input_scale, Dense(hidden), Dense(out).
struct Mlp {
    Standardizer stdz;
    DenseParams hidden;
    DenseParams out;

    static Mlp from_model(const ModelParams& m) {
        return {Standardizer::from_layers(m, 0), m.layer<DenseParams>(2), m.layer<DenseParams>(3)};
    }

    void store(ModelParams& m) const {
        m.layers.clear();
        stdz.append_to(m.layers);
        m.layers.emplace_back(hidden);
        m.layers.emplace_back(out);
    }

    Tensor2 forward(const Tensor2& x) const { return dense_forward(out, dense_forward(hidden, stdz.apply(x))); }
};

enum class MlpLoss { Mse, SigmoidBce };

struct MlpConfig {
    std::size_t hidden = 32;
    Activation hidden_activation = Activation::ReLU;
    MlpLoss loss = MlpLoss::Mse;
    std::size_t steps = 2500;
    std::size_t batch = 32;
    /// MSE targets are divided by this during training and the output layer
    /// is rescaled afterwards, so the returned network predicts raw targets.
    double target_scale = 1.0;
    AdamConfig adam;
    std::size_t eval_every = 0;
};

/// Called every `eval_every` steps (and after the last one) with the network
/// in raw target units and the mean training loss since the previous call.
using MlpMonitor = std::function<void(std::size_t step, const Mlp& net, double recent_train_loss)>;

inline Mlp train_mlp(const Tensor2& x, const Tensor2& y, const MlpConfig& cfg, std::uint64_t seed,
                     const MlpMonitor& monitor = {}) {
    require_shape(y.rows() == 1 && x.cols() == y.cols(), "train_mlp expects a 1 x n target row");
    require_shape(x.cols() > 0 && x.allFinite() && y.allFinite(), "train_mlp needs finite, non-empty data");
    require_shape(cfg.target_scale > 0.0, "target_scale must be positive");
    const auto n = static_cast<std::size_t>(x.cols());
    Rng rng(derive_seed(seed, 0x696e6974ULL));
    Mlp net;
    net.stdz = Standardizer::fit(x);
    const Activation out_act = cfg.loss == MlpLoss::SigmoidBce ? Activation::Sigmoid : Activation::Identity;
    net.hidden = DenseParams::random(static_cast<std::size_t>(x.rows()), cfg.hidden, cfg.hidden_activation, rng);
    net.out = DenseParams::random(cfg.hidden, 1, out_act, rng);
    const Tensor2 xs = net.stdz.apply(x);
    const Tensor2 ys = cfg.loss == MlpLoss::Mse ? Tensor2(y / cfg.target_scale) : y;

    DenseGrads gh(net.hidden), go(net.out);
    const std::vector<ParamRef> params{{flat(net.hidden.weights), flat(gh.weights)},
                                       {flat(net.hidden.bias), flat(gh.bias)},
                                       {flat(net.out.weights), flat(go.weights)},
                                       {flat(net.out.bias), flat(go.bias)}};
    AdamState adam(params, cfg.adam);
    const double unscale = cfg.loss == MlpLoss::Mse ? cfg.target_scale * cfg.target_scale : 1.0;
    auto raw_units = [&] {
        Mlp r = net;
        if (cfg.loss == MlpLoss::Mse) {
            r.out.weights *= cfg.target_scale;
            r.out.bias *= cfg.target_scale;
        }
        return r;
    };

    Rng order_rng(derive_seed(seed, 0x6f72646572ULL));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t pos = n;
    double recent = 0.0;
    std::size_t recent_n = 0;
    Tensor2 xb(x.rows(), static_cast<Eigen::Index>(std::min(cfg.batch, n)));
    Tensor2 yb(1, xb.cols());
    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        if (pos + xb.cols() > n) {
            order_rng.shuffle(order);
            pos = 0;
        }
        for (Eigen::Index j = 0; j < xb.cols(); ++j) {
            const auto i = static_cast<Eigen::Index>(order[pos + static_cast<std::size_t>(j)]);
            xb.col(j) = xs.col(i);
            yb(0, j) = ys(0, i);
        }
        pos += static_cast<std::size_t>(xb.cols());

        const Tensor2 a = dense_forward(net.hidden, xb);
        Tensor2 z = net.out.weights * a;
        z.colwise() += net.out.bias;
        LossResult loss;
        if (cfg.loss == MlpLoss::Mse) {
            loss = mse(z, yb);
        } else {
            std::vector<double> t(yb.data(), yb.data() + yb.size());
            loss = sigmoid_bce(z, t);
        }
        recent += loss.loss * unscale;
        ++recent_n;

        zero_grads(params);
        const Tensor2 da = dense_backward(net.out, a, z, loss.grad, go);
        dense_backward(net.hidden, xb, a, da, gh);
        adam_update(adam, params);

        if (monitor && ((cfg.eval_every && step % cfg.eval_every == 0) || step == cfg.steps)) {
            monitor(step, raw_units(), recent / static_cast<double>(recent_n));
            recent = 0.0;
            recent_n = 0;
        }
    }
    return raw_units();
}

}  // namespace gridseer::nn
