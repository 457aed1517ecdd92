#include <gtest/gtest.h>

#include <cmath>

#include "gridseer/nn/adam.hpp"
#include "gridseer/nn/dense.hpp"
#include "gridseer/nn/loss.hpp"
#include "gridseer/nn/lstm.hpp"
#include "gridseer/nn/mlp.hpp"
#include "gridseer/nn/model.hpp"
#include "gridseer/nn/standardize.hpp"
#include "gridseer/nn/svm.hpp"
#include "support/gradcheck.hpp"

using namespace gridseer;
using namespace gridseer::nn;

TEST(Lstm, ZeroParametersGiveZeroState) {
    const LstmParams p(3, 4);
    const auto [h, c] = lstm_step(p, Tensor2::Ones(3, 2), Tensor2::Zero(4, 2), Tensor2::Zero(4, 2));
    EXPECT_EQ(h, Tensor2::Zero(4, 2));
    EXPECT_EQ(c, Tensor2::Zero(4, 2));
}

TEST(Lstm, SingleStepMatchesHandComputation) {
    Rng rng(3);
    const auto p = LstmParams::random(2, 3, rng);
    const Tensor2 x = testkit::random_matrix(2, 1, rng), h0 = testkit::random_matrix(3, 1, rng),
                  c0 = testkit::random_matrix(3, 1, rng);
    const auto [h, c] = lstm_step(p, x, h0, c0);
    Tensor2 xh(5, 1);
    xh << x, h0;
    const Tensor2 z = p.weights * xh + p.bias;
    for (Eigen::Index k = 0; k < 3; ++k) {
        const double i = sigmoid(z(k)), f = sigmoid(z(3 + k)), o = sigmoid(z(6 + k)), g = std::tanh(z(9 + k));
        const double ck = f * c0(k) + i * g;
        EXPECT_NEAR(c(k), ck, 1e-14);
        EXPECT_NEAR(h(k), o * std::tanh(ck), 1e-14);
    }
}

TEST(Lstm, OneStepUnrollEqualsStep) {
    Rng rng(5);
    const auto p = LstmParams::random(3, 4, rng);
    const Tensor2 x = testkit::random_matrix(3, 2, rng);
    const auto [h, c] = lstm_step(p, x, Tensor2::Zero(4, 2), Tensor2::Zero(4, 2));
    EXPECT_TRUE(lstm_forward(p, x, 1).isApprox(h, 1e-15));
}

TEST(Lstm, UnrollEqualsRepeatedSteps) {
    Rng rng(6);
    const auto p = LstmParams::random(3, 4, rng);
    const Tensor2 x = testkit::random_matrix(3, 4 * 2, rng);
    Tensor2 h = Tensor2::Zero(4, 2), c = Tensor2::Zero(4, 2);
    for (int t = 0; t < 4; ++t) std::tie(h, c) = lstm_step(p, x.middleCols(2 * t, 2), h, c);
    EXPECT_LT((lstm_forward(p, x, 4) - h).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Lstm, EncodingSensitiveToFirstSample) {
    Rng rng(8);
    const auto p = LstmParams::random(3, 4, rng);
    Tensor2 a = testkit::random_matrix(3, 10, rng);
    Tensor2 b = a;
    b(0, 0) += 0.5;
    EXPECT_GT((lstm_forward(p, a, 10) - lstm_forward(p, b, 10)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Lstm, ShapeErrors) {
    const LstmParams p(3, 4);
    EXPECT_THROW(lstm_forward(p, Tensor2::Zero(2, 4), 2), ShapeMismatch);
    EXPECT_THROW(lstm_forward(p, Tensor2::Zero(3, 5), 2), ShapeMismatch);
}

TEST(GradientCheck, LstmOverTwentySeeds) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        EXPECT_LE(testkit::lstm_gradient_error(seed, 1), 1e-4) << "T=1 seed " << seed;
        EXPECT_LE(testkit::lstm_gradient_error(seed, 6), 1e-4) << "T=6 seed " << seed;
    }
}

TEST(GradientCheck, DenseOverTwentySeeds) {
    for (auto act : {Activation::Identity, Activation::ReLU, Activation::Sigmoid, Activation::Softmax})
        for (std::uint64_t seed = 0; seed < 20; ++seed)
            EXPECT_LE(testkit::dense_gradient_error(seed, act), 1e-6) << to_string(act) << " seed " << seed;
}

TEST(GradientCheck, LossesOverTwentySeeds) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) EXPECT_LE(testkit::loss_gradient_error(seed), 1e-6) << seed;
}

TEST(Loss, MsePerfectAndUnit) {
    const Tensor2 y = Tensor2::Constant(2, 3, 0.7);
    const auto r = mse(y, y);
    EXPECT_EQ(r.loss, 0.0);
    EXPECT_EQ(r.grad, Tensor2::Zero(2, 3));
    EXPECT_DOUBLE_EQ(mse(Tensor2::Ones(1, 1), Tensor2::Zero(1, 1)).loss, 1.0);
}

TEST(Loss, SoftmaxXentUniformLogits) {
    const std::vector<int> labels{2};
    EXPECT_NEAR(softmax_xent(Tensor2::Zero(4, 1), labels).loss, std::log(4.0), 1e-15);
    EXPECT_THROW(softmax_xent(Tensor2::Zero(4, 1), std::vector<int>{4}), ShapeMismatch);
}

TEST(Loss, SigmoidBceStableAtExtremes) {
    Tensor2 z(1, 2);
    z << 800.0, -800.0;
    const auto r = sigmoid_bce(z, std::vector<double>{1.0, 0.0});
    EXPECT_TRUE(std::isfinite(r.loss));
    EXPECT_NEAR(r.loss, 0.0, 1e-12);
}

TEST(Dense, SoftmaxColumnsSumToOne) {
    Rng rng(2);
    const auto p = DenseParams::random(4, 5, Activation::Softmax, rng);
    const Tensor2 y = dense_forward(p, testkit::random_matrix(4, 7, rng, 10.0));
    for (Eigen::Index c = 0; c < y.cols(); ++c) EXPECT_NEAR(y.col(c).sum(), 1.0, 1e-12);
    EXPECT_THROW(dense_forward(p, Tensor2::Zero(3, 1)), ShapeMismatch);
}

TEST(Adam, ZeroGradientLeavesParameters) {
    Vector w = Vector::Constant(3, 0.5), g = Vector::Zero(3);
    const std::vector<ParamRef> ps{{flat(w), flat(g)}};
    AdamState st(ps);
    for (int i = 0; i < 10; ++i) adam_update(st, ps);
    EXPECT_EQ(w, Vector::Constant(3, 0.5));
    EXPECT_EQ(st.step, 10u);
}

TEST(Adam, ConstantGradientStepApproachesLr) {
    Vector w = Vector::Zero(2), g(2);
    g << 0.3, -2.0;
    const std::vector<ParamRef> ps{{flat(w), flat(g)}};
    AdamConfig cfg;
    cfg.lr = 0.01;
    AdamState st(ps, cfg);
    Vector prev = w;
    for (int i = 0; i < 200; ++i) {
        prev = w;
        adam_update(st, ps);
        EXPECT_EQ(st.step, static_cast<std::size_t>(i + 1));
    }
    EXPECT_NEAR(prev(0) - w(0), 0.01, 1e-8);
    EXPECT_NEAR(prev(1) - w(1), -0.01, 1e-8);
}

TEST(Adam, ShapeMismatchDetected) {
    Vector w = Vector::Zero(2), g = Vector::Zero(2), w3 = Vector::Zero(3), g3 = Vector::Zero(3);
    AdamState st(std::vector<ParamRef>{{flat(w), flat(g)}});
    EXPECT_THROW(adam_update(st, {{flat(w3), flat(g3)}}), ShapeMismatch);
}

TEST(ClipGradNorm, RescalesToMaxNorm) {
    Vector w = Vector::Zero(2), g(2);
    g << 3.0, 4.0;
    const std::vector<ParamRef> ps{{flat(w), flat(g)}};
    EXPECT_DOUBLE_EQ(clip_grad_norm(ps, 1.0), 5.0);
    EXPECT_NEAR(g.norm(), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(clip_grad_norm(ps, 2.0), 1.0);
    EXPECT_NEAR(g.norm(), 1.0, 1e-15);
}

TEST(Standardizer, ZeroMeanUnitVariance) {
    Rng rng(4);
    Tensor2 x = testkit::random_matrix(3, 200, rng, 5.0);
    x.row(2).setConstant(7.0);  // constant feature
    const auto s = Standardizer::fit(x);
    const Tensor2 z = s.apply(x);
    for (Eigen::Index r = 0; r < 2; ++r) {
        EXPECT_NEAR(z.row(r).mean(), 0.0, 1e-12);
        EXPECT_NEAR(z.row(r).squaredNorm() / 200.0, 1.0, 1e-12);
    }
    EXPECT_TRUE(z.row(2).isZero(0.0));
    Tensor2 y = x;
    s.apply_inplace(y);
    EXPECT_TRUE(y.isApprox(z));
    EXPECT_THROW(s.apply(Tensor2::Zero(2, 1)), ShapeMismatch);
}

TEST(Mlp, FitsLinearTarget) {
    Rng rng(1);
    const Tensor2 x = testkit::random_matrix(2, 400, rng);
    Tensor2 y(1, 400);
    for (Eigen::Index i = 0; i < 400; ++i) y(0, i) = 30.0 * x(0, i) - 10.0 * x(1, i) + 5.0;
    MlpConfig cfg;
    cfg.steps = 3000;
    cfg.target_scale = 30.0;
    cfg.adam.lr = 3e-3;
    const Mlp net = train_mlp(x, y, cfg, 9);
    EXPECT_LT(mse(net.forward(x), y).loss, 1.0);

    ModelParams m;
    m.kind = ModelKind::SubsetSurrogate;
    net.store(m);
    EXPECT_EQ(Mlp::from_model(m).forward(x), net.forward(x));
}

TEST(Mlp, SameSeedSameNetwork) {
    Rng rng(1);
    const Tensor2 x = testkit::random_matrix(2, 50, rng);
    const Tensor2 y = x.row(0);
    MlpConfig cfg;
    cfg.steps = 50;
    const auto a = train_mlp(x, y, cfg, 3), b = train_mlp(x, y, cfg, 3), c = train_mlp(x, y, cfg, 4);
    EXPECT_EQ(a.hidden, b.hidden);
    EXPECT_EQ(a.out, b.out);
    EXPECT_FALSE(a.hidden == c.hidden);
}

TEST(Svm, SeparableToySetIsPerfect) {
    Rng rng(12);
    Tensor2 x(2, 200);
    std::vector<int> labels(200);
    for (int i = 0; i < 200; ++i) {
        labels[static_cast<std::size_t>(i)] = i % 2;
        const double sgn = i % 2 ? 1.0 : -1.0;
        x(0, i) = sgn * rng.uniform(0.5, 2.0);
        x(1, i) = rng.uniform(-3.0, 3.0);
    }
    const auto m = svm_train(x, labels, 7);
    EXPECT_EQ(svm_predict(m, x), labels);
    EXPECT_EQ(m.kind, ModelKind::SvmBaseline);
}

TEST(Svm, SingleClassIsDegenerate) {
    const std::vector<int> labels(5, 1);
    EXPECT_THROW(svm_train(Tensor2::Zero(2, 5), labels, 1), DegenerateLabels);
}

namespace {

ModelParams sample_model() {
    Rng rng(21);
    ModelParams m;
    m.kind = ModelKind::BusLocator;
    Standardizer::identity(3).append_to(m.layers);
    m.layers.emplace_back(LstmParams::random(3, 5, rng));
    m.layers.emplace_back(DenseParams::random(5, 24, Activation::Softmax, rng));
    m.metadata = {{"seed", 42}, {"kind", "ThreePhase"}};
    return m;
}

}  // namespace

TEST(Checkpoint, RoundTripIsExact) {
    const auto m = sample_model();
    const auto bytes = serialize_checkpoint(m);
    EXPECT_EQ(bytes.substr(0, 8), "GSNN0001");
    EXPECT_EQ(parse_checkpoint(bytes), m);
    EXPECT_EQ(serialize_checkpoint(parse_checkpoint(bytes)), bytes);

    const auto path = std::filesystem::temp_directory_path() / "gridseer_ckpt_test.gsnn";
    save_checkpoint(m, path);
    EXPECT_EQ(load_checkpoint(path), m);
    std::filesystem::remove(path);
}

TEST(Checkpoint, CorruptInputsRejected) {
    const auto bytes = serialize_checkpoint(sample_model());
    EXPECT_THROW(parse_checkpoint("GSNN0002" + bytes.substr(8)), ParseError);
    EXPECT_THROW(parse_checkpoint(bytes.substr(0, bytes.size() - 8)), ParseError);
    EXPECT_THROW(parse_checkpoint(bytes.substr(0, 20)), ParseError);
    EXPECT_THROW(parse_checkpoint(""), ParseError);
    EXPECT_THROW(load_checkpoint("/nonexistent/model.gsnn"), IoError);
}

TEST(Checkpoint, LayerTypeChecked) {
    const auto m = sample_model();
    EXPECT_NO_THROW(m.layer<LstmParams>(2));
    EXPECT_THROW(m.layer<DenseParams>(2), ShapeMismatch);
    EXPECT_THROW(m.layer<DenseParams>(9), ShapeMismatch);
}

TEST(ModelKind, NamesRoundTrip) {
    for (auto k : {ModelKind::FaultType, ModelKind::BusLocator, ModelKind::Congestion, ModelKind::SolarPower,
                   ModelKind::SubsetSurrogate, ModelKind::SvmBaseline})
        EXPECT_EQ(parse_model_kind(to_string(k)), k);
}
