#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <vector>

#include "hybridfc/ensemble.hpp"
#include "hybridfc/mlp.hpp"
#include "hybridfc/rng.hpp"
#include "oracles.hpp"

using namespace hybridfc;

namespace {

// Straight-line eval-mode recomputation of one MLP block with plain loops,
// written directly against the layer formulas.
std::vector<double> mlp_eval_oracle(const MlpModule& m, const std::vector<double>& x,
                                    double eps = 1e-5) {
    const int in = m.shape().in, h = m.shape().hidden, out = m.shape().out;
    std::vector<double> a1(h, 0.0);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < in; ++j) a1[i] += m.w1(i, j) * x[static_cast<std::size_t>(j)];
    std::vector<double> bn(h);
    for (int i = 0; i < h; ++i) {
        double xhat = (a1[static_cast<std::size_t>(i)] - m.run_mean[i]) /
                      std::sqrt(m.run_var[i] + eps);
        bn[static_cast<std::size_t>(i)] = m.gamma[i] * xhat + m.beta[i];
    }
    std::vector<double> r(h, 0.0);
    for (int i = 0; i < h; ++i) {
        double a3 = 0.0;
        for (int j = 0; j < h; ++j) a3 += m.w3(i, j) * bn[static_cast<std::size_t>(j)];
        r[static_cast<std::size_t>(i)] = a3 > 0.0 ? a3 : 0.0;
    }
    std::vector<double> y(static_cast<std::size_t>(out), 0.0);
    for (int i = 0; i < out; ++i)
        for (int j = 0; j < h; ++j) y[static_cast<std::size_t>(i)] += m.w5(i, j) * r[static_cast<std::size_t>(j)];
    return y;
}

double ensemble_eval_oracle(const EnsembleNetwork& net, const EnsembleExample& ex) {
    const auto& cfg = net.config();
    const auto& ch = cfg.channels;
    std::vector<double> head_in;
    if (ch.count() >= 2) {
        std::vector<double> fuse_in;
        if (ch.text) {
            auto u = mlp_eval_oracle(net.theta_text_, ex.text, cfg.bn_eps);
            fuse_in.insert(fuse_in.end(), u.begin(), u.end());
        }
        if (ch.embedding) {
            auto u = mlp_eval_oracle(net.theta_emb_, ex.embedding, cfg.bn_eps);
            fuse_in.insert(fuse_in.end(), u.begin(), u.end());
        }
        if (ch.path) fuse_in.push_back(ex.zeta);
        head_in = mlp_eval_oracle(net.theta_fuse_, fuse_in, cfg.bn_eps);
    } else if (ch.text) {
        head_in = mlp_eval_oracle(net.theta_text_, ex.text, cfg.bn_eps);
    } else if (ch.embedding) {
        head_in = mlp_eval_oracle(net.theta_emb_, ex.embedding, cfg.bn_eps);
    } else {
        head_in = {ex.zeta};
    }
    double s = 0.0;
    for (std::size_t i = 0; i < head_in.size(); ++i)
        s += net.w_sigma[static_cast<Eigen::Index>(i)] * head_in[i];
    return 1.0 / (1.0 + std::exp(-s));
}

EnsembleConfig small_config(ChannelMask mask, std::uint64_t seed, double keep = 1.0) {
    EnsembleConfig cfg;
    cfg.channels = mask;
    cfg.text_dim = 7;
    cfg.emb_dim = 9;
    cfg.text_hidden = 6;
    cfg.text_out = 4;
    cfg.emb_hidden = 5;
    cfg.emb_out = 3;
    cfg.fuse_hidden = 5;
    cfg.fuse_out = 3;
    cfg.dropout_keep = keep;
    cfg.seed = seed;
    return cfg;
}

std::vector<EnsembleExample> random_examples(const EnsembleConfig& cfg, std::size_t n,
                                             std::uint64_t seed) {
    Rng rng(seed);
    std::vector<EnsembleExample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].text.resize(static_cast<std::size_t>(cfg.text_dim));
        for (double& v : out[i].text) v = rng.uniform(-1.5, 1.5);
        out[i].embedding.resize(static_cast<std::size_t>(cfg.emb_dim));
        for (double& v : out[i].embedding) v = rng.uniform(-1.5, 1.5);
        out[i].zeta = rng.uniform(0.0, 1.0);
        out[i].label = static_cast<int>(i % 2);
    }
    return out;
}

const std::vector<ChannelMask> kAllMasks = {
    {true, false, false}, {false, true, false}, {false, false, true},
    {true, true, false},  {true, false, true},  {false, true, true},
    {true, true, true},
};

}  // namespace

TEST(Mlp, ForwardContractsAndShapes) {
    Rng rng(5);
    MlpModule m({3, 4, 2}, 1.0, 1e-5, 0.1, rng);
    Matrix x = Matrix::Random(3, 5);
    Matrix y = m.forward(x, Mode::Eval, rng);
    EXPECT_EQ(y.rows(), 2);
    EXPECT_EQ(y.cols(), 5);

    Matrix bad = Matrix::Random(4, 5);
    EXPECT_THROW(m.forward(bad, Mode::Eval, rng), ContractViolation);
    Matrix single = Matrix::Random(3, 1);
    EXPECT_THROW(m.forward(single, Mode::Train, rng), ContractViolation);
    EXPECT_NO_THROW(m.forward(single, Mode::Eval, rng));
}

TEST(Mlp, ZeroWeightsGiveZeroOutput) {
    Rng rng(6);
    MlpModule m({3, 4, 2}, 1.0, 1e-5, 0.1, rng);
    m.w1.setZero();
    m.w3.setZero();
    m.w5.setZero();
    Matrix x = Matrix::Random(3, 4);
    Matrix y = m.forward(x, Mode::Eval, rng);
    EXPECT_EQ(y.norm(), 0.0);
}

TEST(Mlp, BatchNormClosedForm) {
    Rng rng(7);
    MlpModule m({1, 1, 1}, 1.0, 1e-5, 0.1, rng);
    m.w1(0, 0) = 1.0;
    m.gamma[0] = 1.0;
    m.beta[0] = 0.0;
    Matrix x(1, 2);
    x << 1.0, 3.0;
    MlpCache cache;
    m.forward(x, Mode::Train, rng, &cache);
    // mean 2, biased var 1: x̂ = ±1/√(1+ε)
    double expected = 1.0 / std::sqrt(1.0 + 1e-5);
    EXPECT_NEAR(cache.bn(0, 0), -1.0, 1e-3);
    EXPECT_NEAR(cache.bn(0, 1), 1.0, 1e-3);
    EXPECT_DOUBLE_EQ(cache.bn(0, 1), expected);
    EXPECT_DOUBLE_EQ(cache.bn(0, 0), -expected);
}

TEST(Mlp, BnShiftInvarianceInTrainMode) {
    Rng rng(8);
    MlpModule m({3, 4, 2}, 1.0, 1e-5, 0.1, rng);
    Rng data_rng(9);
    Matrix x(3, 6);
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = data_rng.uniform(-2.0, 2.0);
    MlpCache c1, c2;
    m.forward(x, Mode::Train, rng, &c1);
    Matrix shifted = x.array() + 17.5;  // constant shift per input feature
    m.forward(shifted, Mode::Train, rng, &c2);
    EXPECT_LT((c1.bn - c2.bn).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Mlp, EvalAffineChainMatchesHandComputation) {
    Rng rng(10);
    MlpModule m({2, 2, 2}, 1.0, 1e-5, 0.1, rng);
    m.w1 << 1.0, 2.0, 0.0, 1.0;
    m.gamma << 2.0, 1.0;
    m.beta << 0.5, -0.25;
    m.w3 << 1.0, -1.0, 0.5, 0.5;
    m.w5 << 1.0, 0.0, 0.0, 3.0;
    m.run_mean << 0.0, 0.0;
    m.run_var << 1.0, 1.0;
    Matrix x(2, 1);
    x << 1.0, 1.0;
    // a1 = (3, 1); x̂ = a1/√(1+ε); bn = (2x̂₁+0.5, x̂₂−0.25)
    double is = 1.0 / std::sqrt(1.0 + 1e-5);
    double bn1 = 2.0 * 3.0 * is + 0.5, bn2 = 1.0 * is - 0.25;
    double r1 = std::max(0.0, bn1 - bn2), r2 = std::max(0.0, 0.5 * bn1 + 0.5 * bn2);
    Matrix y = m.forward(x, Mode::Eval, rng);
    EXPECT_NEAR(y(0, 0), r1, 1e-12);
    EXPECT_NEAR(y(1, 0), 3.0 * r2, 1e-12);
}

TEST(Mlp, RunningStatsFollowMomentumUpdate) {
    Rng rng(11);
    MlpModule m({1, 1, 1}, 1.0, 1e-5, 0.1, rng);
    m.w1(0, 0) = 1.0;
    Matrix x(1, 2);
    x << 2.0, 6.0;  // batch mean 4, biased var 4
    m.forward(x, Mode::Train, rng);
    EXPECT_NEAR(m.run_mean[0], 0.9 * 0.0 + 0.1 * 4.0, 1e-12);
    EXPECT_NEAR(m.run_var[0], 0.9 * 1.0 + 0.1 * 4.0, 1e-12);
    m.forward(x, Mode::Train, rng);
    EXPECT_NEAR(m.run_mean[0], 0.9 * 0.4 + 0.1 * 4.0, 1e-12);
}

TEST(Mlp, DropoutMasksAndRescales) {
    Rng rng(12);
    MlpModule m({3, 8, 2}, 0.5, 1e-5, 0.1, rng);
    Matrix x = Matrix::Random(3, 6);
    MlpCache with_cache;
    m.forward(x, Mode::Train, rng, &with_cache);
    ASSERT_GT(with_cache.mask.size(), 0);
    Matrix relu = with_cache.a3.cwiseMax(0.0);
    std::size_t zeros = 0;
    for (Eigen::Index j = 0; j < relu.cols(); ++j) {
        for (Eigen::Index i = 0; i < relu.rows(); ++i) {
            double d = with_cache.dropped(i, j);
            if (with_cache.mask(i, j) == 0.0) {
                EXPECT_EQ(d, 0.0);
                ++zeros;
            } else {
                EXPECT_DOUBLE_EQ(d, relu(i, j) / 0.5);
            }
        }
    }
    EXPECT_GT(zeros, 0u);  // keep 0.5 over 48 entries: some drop

    // Eval mode ignores dropout entirely.
    MlpCache eval_cache;
    m.forward(x, Mode::Eval, rng, &eval_cache);
    EXPECT_EQ(eval_cache.mask.size(), 0);
    Matrix eval_relu = eval_cache.a3.cwiseMax(0.0);
    EXPECT_LT((eval_cache.dropped - eval_relu).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Ensemble, ForwardMatchesStraightLineOracleOnAllMasks) {
    int cfg_index = 0;
    for (const ChannelMask& mask : kAllMasks) {
        EnsembleConfig cfg = small_config(mask, 100 + static_cast<std::uint64_t>(cfg_index++));
        EnsembleNetwork net(cfg);
        auto examples = random_examples(cfg, 5, 77);
        for (const auto& ex : examples) {
            double got = net.predict(ex);
            double want = ensemble_eval_oracle(net, ex);
            EXPECT_NEAR(got, want, 1e-12) << "mask " << mask.name();
        }
    }
}

TEST(Ensemble, AllZeroWeightsScoreOneHalf) {
    EnsembleConfig cfg = small_config({true, true, true}, 21);
    EnsembleNetwork net(cfg);
    std::vector<double> zeros(net.param_count(), 0.0);
    net.load_flat_params(zeros);
    auto examples = random_examples(cfg, 3, 5);
    for (const auto& ex : examples) EXPECT_DOUBLE_EQ(net.predict(ex), 0.5);
}

TEST(Ensemble, NegatedHeadFlipsScore) {
    EnsembleConfig cfg = small_config({true, true, true}, 22);
    EnsembleNetwork net(cfg);
    auto examples = random_examples(cfg, 4, 6);
    std::vector<double> before;
    for (const auto& ex : examples) before.push_back(net.predict(ex));
    net.w_sigma = -net.w_sigma;
    for (std::size_t i = 0; i < examples.size(); ++i)
        EXPECT_NEAR(net.predict(examples[i]), 1.0 - before[i], 1e-12);
}

TEST(Ensemble, BceKnownValues) {
    RowVector omega(1), label(1);
    omega << 0.5;
    label << 1.0;
    EXPECT_NEAR(EnsembleNetwork::bce_loss(omega, label), std::log(2.0), 1e-15);

    RowVector o2(2), y2(2);
    o2 << 0.9, 0.2;
    y2 << 1.0, 0.0;
    double want = (-std::log(0.9) - std::log(0.8)) / 2.0;
    EXPECT_NEAR(EnsembleNetwork::bce_loss(o2, y2), want, 1e-15);

    // Perfect predictions cost ≈ 0 after clamping; extreme scores stay finite.
    RowVector o3(2), y3(2);
    o3 << 1.0 - 1e-15, 1e-15;
    y3 << 1.0, 0.0;
    double tiny = EnsembleNetwork::bce_loss(o3, y3);
    EXPECT_GE(tiny, 0.0);
    EXPECT_LT(tiny, 1e-6);
    EXPECT_TRUE(std::isfinite(tiny));
}

namespace {

// The loss is non-differentiable where a pre-ReLU activation is zero; a
// central difference with step h straddles the kink whenever |a3| < h·scale.
// Deterministically resample until every activation clears a safe margin.
double min_abs_prerelu(EnsembleNetwork& net, const EnsembleBatch& batch) {
    EnsembleCache cache;
    net.forward(batch, Mode::Train, &cache);
    double closest = std::numeric_limits<double>::infinity();
    for (const MlpCache* c : {&cache.text, &cache.emb, &cache.fuse}) {
        for (Eigen::Index k = 0; k < c->a3.size(); ++k)
            closest = std::min(closest, std::fabs(c->a3.data()[k]));
    }
    return closest;
}

}  // namespace

TEST(Ensemble, GradientsMatchCentralFiniteDifferences) {
    // Acceptance-grade check: 20 random small configurations across all
    // channel masks, dropout disabled, train-mode batch statistics.
    for (int trial = 0; trial < 20; ++trial) {
        ChannelMask mask = kAllMasks[static_cast<std::size_t>(trial) % kAllMasks.size()];
        EnsembleConfig cfg = small_config(mask, 1000 + static_cast<std::uint64_t>(trial));
        EnsembleNetwork net(cfg);
        auto examples = random_examples(cfg, 5, 2000 + static_cast<std::uint64_t>(trial));
        EnsembleBatch batch = net.make_batch(examples);
        for (std::uint64_t bump = 1; min_abs_prerelu(net, batch) < 1e-2; ++bump) {
            ASSERT_LT(bump, 50u) << "could not find a kink-free configuration";
            cfg.seed = 1000 + static_cast<std::uint64_t>(trial) + 7919 * bump;
            net = EnsembleNetwork(cfg);
            examples = random_examples(cfg, 5, 2000 + static_cast<std::uint64_t>(trial) + bump);
            batch = net.make_batch(examples);
        }

        EnsembleGrads grads;
        net.loss_and_gradients(batch, grads);
        std::vector<double> analytic = net.flatten_grads(grads);
        std::vector<double> params = net.flatten_params();

        auto loss_at = [&net, &batch, &params]() {
            net.load_flat_params(params);
            RowVector omega = net.forward(batch, Mode::Train);
            return EnsembleNetwork::bce_loss(omega, batch.label);
        };
        double worst = 0.0;
        for (std::size_t i = 0; i < params.size(); ++i) {
            double fd = oracle::central_difference(loss_at, &params[i], 1e-4);
            double denom = std::max({1e-3, std::fabs(fd), std::fabs(analytic[i])});
            worst = std::max(worst, std::fabs(fd - analytic[i]) / denom);
        }
        EXPECT_LT(worst, 1e-4) << "mask " << mask.name() << " trial " << trial;
        net.load_flat_params(params);
    }
}

TEST(Ensemble, ZeroWeightsBalancedLabelsAreStationary) {
    EnsembleConfig cfg = small_config({true, true, true}, 31);
    EnsembleNetwork net(cfg);
    std::vector<double> zeros(net.param_count(), 0.0);
    net.load_flat_params(zeros);
    auto examples = random_examples(cfg, 6, 8);  // labels alternate 0/1
    EnsembleBatch batch = net.make_batch(examples);
    EnsembleGrads grads;
    net.loss_and_gradients(batch, grads);
    std::vector<double> flat = net.flatten_grads(grads);
    for (double g : flat) EXPECT_EQ(g, 0.0);
}

TEST(Ensemble, DuplicatedBatchLeavesGradientsUnchanged) {
    EnsembleConfig cfg = small_config({true, true, true}, 32);
    EnsembleNetwork net(cfg);
    auto examples = random_examples(cfg, 4, 9);
    std::vector<EnsembleExample> doubled = examples;
    doubled.insert(doubled.end(), examples.begin(), examples.end());

    EnsembleGrads g1, g2;
    net.loss_and_gradients(net.make_batch(examples), g1);
    net.loss_and_gradients(net.make_batch(doubled), g2);
    std::vector<double> a = net.flatten_grads(g1), b = net.flatten_grads(g2);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
    EXPECT_LT(worst, 1e-12);
}

TEST(Ensemble, EvalForwardIsPure) {
    EnsembleConfig cfg = small_config({true, true, true}, 33, 0.9);
    EnsembleNetwork net(cfg);
    auto examples = random_examples(cfg, 3, 10);
    double first = net.predict(examples[0]);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(net.predict(examples[0]), first);
}

TEST(EarlyStopping, ConstantLossStopsAtSixty) {
    EarlyStopper stopper(50, 1e-6);
    for (int epoch = 10; epoch <= 50; epoch += 10) {
        EXPECT_FALSE(stopper.observe(epoch, 1.0)) << "epoch " << epoch;
    }
    EXPECT_TRUE(stopper.observe(60, 1.0));
    EXPECT_EQ(stopper.best_epoch(), 10);
}

TEST(EarlyStopping, ImprovementExtendsPatience) {
    EarlyStopper stopper(50, 1e-6);
    EXPECT_FALSE(stopper.observe(10, 1.0));
    EXPECT_FALSE(stopper.observe(20, 1.0));
    EXPECT_FALSE(stopper.observe(30, 0.5));  // new best
    for (int epoch = 40; epoch <= 70; epoch += 10) EXPECT_FALSE(stopper.observe(epoch, 0.5));
    EXPECT_TRUE(stopper.observe(80, 0.5));
    EXPECT_EQ(stopper.best_epoch(), 30);
}

TEST(EarlyStopping, ImprovementMustBeAtLeastMinDelta) {
    EarlyStopper stopper(50, 1e-6);
    EXPECT_FALSE(stopper.observe(10, 1.0));
    EXPECT_FALSE(stopper.observe(20, 1.0 - 5e-7));  // below the threshold
    EXPECT_FALSE(stopper.observe(30, 1.0 - 2e-6));  // counts as improvement
    EXPECT_EQ(stopper.best_epoch(), 30);
    EXPECT_DOUBLE_EQ(stopper.best_val(), 1.0 - 2e-6);
}

TEST(Training, ConstantValidationLossHaltsAtEpochSixty) {
    // All-zero parameters are a stationary point (gradients vanish), so the
    // validation loss stays at ln 2 forever and patience runs out at 60.
    EnsembleConfig cfg = small_config({true, true, true}, 41, 0.9);
    EnsembleNetwork net(cfg);
    std::vector<double> zeros(net.param_count(), 0.0);
    net.load_flat_params(zeros);
    auto examples = random_examples(cfg, 40, 11);
    TrainResult result = train_ensemble(net, examples);
    EXPECT_EQ(result.stopped_epoch, 60);
    EXPECT_EQ(result.best_epoch, 10);
    ASSERT_EQ(result.history.size(), 6u);
    for (const auto& entry : result.history) EXPECT_NEAR(entry.val_loss, std::log(2.0), 1e-12);
}

TEST(Training, BatchSizeIsCeilOfTrainThird) {
    EnsembleConfig cfg = small_config({true, true, true}, 42, 0.9);
    cfg.max_epochs = 10;
    EnsembleNetwork net(cfg);
    auto examples = random_examples(cfg, 100, 12);  // 50 pos / 50 neg
    TrainResult result = train_ensemble(net, examples);
    EXPECT_EQ(result.train_count, 80u);  // 80/20 stratified split
    EXPECT_EQ(result.val_count, 20u);
    EXPECT_EQ(result.batch_size, (result.train_count + 2) / 3);
    EXPECT_EQ(result.batch_size, 27u);
}

TEST(Training, SameSeedGivesIdenticalHistoryAndParameters) {
    EnsembleConfig cfg = small_config({true, true, true}, 43, 0.9);
    cfg.max_epochs = 30;
    auto examples = random_examples(cfg, 30, 13);

    EnsembleNetwork net1(cfg), net2(cfg);
    TrainResult r1 = train_ensemble(net1, examples);
    TrainResult r2 = train_ensemble(net2, examples);
    ASSERT_EQ(r1.history.size(), r2.history.size());
    for (std::size_t i = 0; i < r1.history.size(); ++i) {
        EXPECT_EQ(r1.history[i].epoch, r2.history[i].epoch);
        EXPECT_EQ(r1.history[i].train_loss, r2.history[i].train_loss);
        EXPECT_EQ(r1.history[i].val_loss, r2.history[i].val_loss);
    }
    std::vector<double> p1 = net1.flatten_params(), p2 = net2.flatten_params();
    ASSERT_EQ(p1.size(), p2.size());
    for (std::size_t i = 0; i < p1.size(); ++i) EXPECT_EQ(p1[i], p2[i]);
}

TEST(Training, RestoredParametersMatchBestValidationLoss) {
    EnsembleConfig cfg = small_config({true, true, true}, 44, 0.9);
    cfg.max_epochs = 80;
    EnsembleNetwork net(cfg);
    auto examples = random_examples(cfg, 60, 14);
    TrainResult result = train_ensemble(net, examples);
    ASSERT_FALSE(result.history.empty());
    double min_val = result.history.front().val_loss;
    for (const auto& e : result.history) min_val = std::min(min_val, e.val_loss);
    EXPECT_DOUBLE_EQ(result.best_val_loss, min_val);

    // Recreate the validation batch and confirm the restored network scores
    // it exactly at the recorded best loss.
    SplitIndices split = stratified_split(examples, cfg.val_fraction,
                                          cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    EnsembleBatch val = net.make_batch(examples, split.val);
    RowVector omega = net.forward(val, Mode::Eval);
    EXPECT_DOUBLE_EQ(EnsembleNetwork::bce_loss(omega, val.label), result.best_val_loss);
}

TEST(Training, LearnsLinearlySeparableSignal) {
    EnsembleConfig cfg = small_config({true, true, true}, 45, 0.9);
    cfg.max_epochs = 300;
    EnsembleNetwork net(cfg);
    Rng rng(15);
    std::vector<EnsembleExample> examples(60);
    for (std::size_t i = 0; i < examples.size(); ++i) {
        int label = static_cast<int>(i % 2);
        auto& ex = examples[i];
        ex.label = label;
        ex.text.resize(static_cast<std::size_t>(cfg.text_dim));
        for (double& v : ex.text) v = rng.uniform(-0.3, 0.3) + (label ? 0.8 : -0.8);
        ex.embedding.resize(static_cast<std::size_t>(cfg.emb_dim));
        for (double& v : ex.embedding) v = rng.uniform(-0.3, 0.3) + (label ? -0.6 : 0.6);
        ex.zeta = label ? rng.uniform(0.6, 1.0) : rng.uniform(0.0, 0.4);
    }
    train_ensemble(net, examples);
    std::size_t correct = 0;
    for (const auto& ex : examples) {
        double score = net.predict(ex);
        if ((score > 0.5) == (ex.label == 1)) ++correct;
    }
    EXPECT_GE(correct, examples.size() * 9 / 10);
}

TEST(Training, EmptyAndDegenerateInputsRejected) {
    EnsembleConfig cfg = small_config({true, true, true}, 46, 0.9);
    EnsembleNetwork net(cfg);
    EXPECT_THROW(train_ensemble(net, {}), ConfigError);
    auto tiny = random_examples(cfg, 2, 16);
    EXPECT_THROW(train_ensemble(net, tiny), ConfigError);  // validation split empty
}

TEST(SingleChannel, PathOnlyScoreIsMonotoneTransformOfZeta) {
    EnsembleConfig cfg = small_config({false, true, false}, 47);
    EnsembleNetwork net(cfg);
    double w = net.w_sigma[0];
    ASSERT_NE(w, 0.0);
    for (double zeta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        EnsembleExample ex;
        ex.zeta = zeta;
        EXPECT_NEAR(net.predict(ex), 1.0 / (1.0 + std::exp(-w * zeta)), 1e-15);
    }
}

TEST(ChannelMaskSpec, ParsingAndNames) {
    EXPECT_EQ(ChannelMask({true, true, true}).name(), "HybridFC");
    EXPECT_EQ(ChannelMask({true, false, true}).name(), "TC+EC");
    EXPECT_EQ(ChannelMask({false, true, false}).name(), "PC");
    ChannelMask m = parse_channel_mask("tc,pc");
    EXPECT_TRUE(m.text);
    EXPECT_TRUE(m.path);
    EXPECT_FALSE(m.embedding);
    EXPECT_EQ(parse_channel_mask("hybridfc").count(), 3);
    EXPECT_EQ(parse_channel_mask("EC").name(), "EC");
    EXPECT_THROW(parse_channel_mask("bogus"), ConfigError);
    EXPECT_THROW(parse_channel_mask(""), ConfigError);
}

TEST(EnsembleConfigSpec, ValidationListsAllProblems) {
    EnsembleConfig cfg;
    cfg.text_dim = 0;
    cfg.emb_dim = -2;
    cfg.lr = -1.0;
    cfg.dropout_keep = 0.0;
    try {
        cfg.validate();
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("text_dim"), std::string::npos);
        EXPECT_NE(msg.find("emb_dim"), std::string::npos);
        EXPECT_NE(msg.find("lr"), std::string::npos);
        EXPECT_NE(msg.find("dropout_keep"), std::string::npos);
    }
}

TEST(Checkpoint, RoundTripPreservesScoresBitExactly) {
    EnsembleConfig cfg = small_config({true, true, true}, 48, 0.9);
    cfg.max_epochs = 20;
    EnsembleNetwork net(cfg);
    auto examples = random_examples(cfg, 30, 17);
    train_ensemble(net, examples);

    std::filesystem::path path =
        std::filesystem::temp_directory_path() / "hybridfc_ckpt_test.json";
    save_checkpoint(net, path.string(), "deadbeef00000000");
    EnsembleNetwork loaded = load_checkpoint(path.string());
    EXPECT_EQ(loaded.config().channels, cfg.channels);
    EXPECT_EQ(loaded.config().seed, cfg.seed);
    for (const auto& ex : examples) EXPECT_EQ(loaded.predict(ex), net.predict(ex));
    std::filesystem::remove(path);
}

TEST(Checkpoint, VersionAndShapeErrors) {
    EnsembleConfig cfg = small_config({false, true, false}, 49);
    EnsembleNetwork net(cfg);
    nlohmann::json j = checkpoint_to_json(net);
    j["format_version"] = 999;
    EXPECT_THROW(checkpoint_from_json(j), ConfigError);

    nlohmann::json j2 = checkpoint_to_json(net);
    j2["w_sigma"]["data"].push_back(1.0);  // inconsistent shape
    EXPECT_THROW(checkpoint_from_json(j2), ConfigError);

    nlohmann::json j3 = checkpoint_to_json(net);
    j3.erase("format_version");
    EXPECT_THROW(checkpoint_from_json(j3), ConfigError);
}
