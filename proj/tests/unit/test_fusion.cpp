// Copyright 2026 The clifvqa Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "clifvqa/checkpoint.hpp"
#include "clifvqa/error.hpp"
#include "clifvqa/feature_cache.hpp"
#include "clifvqa/losses.hpp"
#include "clifvqa/metrics.hpp"
#include "clifvqa/model.hpp"
#include "clifvqa/trainer.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace clifvqa {
namespace {

using V = std::vector<double>;

std::vector<double> random_vector(SplitMix64& rng, std::size_t n) {
  V v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

TEST(Losses, WorkedExamples) {
  EXPECT_NEAR(loss_mon(V{0.2, 0.9, 0.4}, V{0.2, 0.9, 0.4}), 0.0, 1e-9);
  EXPECT_NEAR(loss_mon(V{3, 1}, V{1, 3}), 2.0, 1e-9);
  EXPECT_NEAR(loss_mon(V{0, 5}, V{1, 3}), 0.0, 1e-9);
  const V gt{1, 4, 2, 8, 5};
  V affine, negated;
  for (double g : gt) {
    affine.push_back(2 * g + 5);
    negated.push_back(-g);
  }
  EXPECT_NEAR(loss_lin(affine, gt), 0.0, 1e-9);
  EXPECT_NEAR(loss_lin(negated, gt), 1.0, 1e-9);
  EXPECT_NEAR(loss_lin(V{1, 1, 2, 2}, V{1, 2, 1, 2}), 0.5, 1e-9);
}

TEST(Losses, ZeroVarianceIsHalfWithZeroGradient) {
  const auto r = linearity_loss(V{2, 2, 2}, V{1, 2, 3});
  EXPECT_EQ(r.value, 0.5);
  for (double g : r.grad) EXPECT_EQ(g, 0.0);
  EXPECT_THROW(linearity_loss(V{1}, V{1}), std::invalid_argument);
  EXPECT_THROW(monotonicity_loss(V{1, 2}, V{1}), std::invalid_argument);
}

TEST(Losses, TotalLossExamples) {
  const auto t = total_loss(V{3, 1}, V{1, 3}, 1.0, 1.0);
  EXPECT_NEAR(t.total, 3.0, 1e-9);
  EXPECT_NEAR(t.mon, 2.0, 1e-9);
  EXPECT_NEAR(t.lin, 1.0, 1e-9);
  const V p{0.3, -1, 2, 0.5}, g{1, 2, 3, 4};
  EXPECT_NEAR(total_loss(p, g, 0.0, 0.7).total, 0.7 * loss_lin(p, g), 1e-12);
  EXPECT_EQ(total_loss(g, g, 1.0, 0.0).total, 0.0);
}

TEST(Losses, MonotonicityMatchesOracle) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.uniform_int(20);
    const auto p = random_vector(rng, n), g = random_vector(rng, n);
    EXPECT_NEAR(loss_mon(p, g), testing::oracle_loss_mon(p, g), 1e-12);
  }
}

TEST(Losses, Invariances) {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.uniform_int(20);
    auto p = random_vector(rng, n);
    const auto g = random_vector(rng, n);
    // Shifts by integers keep the arithmetic exact.
    const double c = static_cast<double>(rng.uniform_int(8)) - 4.0;
    const double s = rng.uniform(0.01, 50.0);
    V shifted(p), affine(p);
    for (std::size_t i = 0; i < n; ++i) {
      shifted[i] = p[i] + c;
      affine[i] = s * p[i] + c;
    }
    EXPECT_NEAR(loss_mon(shifted, g), loss_mon(p, g), 1e-12);
    EXPECT_NEAR(loss_lin(affine, g), loss_lin(p, g), 1e-6);
    EXPECT_GE(loss_mon(p, g), 0.0);
    const double lin = loss_lin(p, g);
    EXPECT_GE(lin, 0.0);
    EXPECT_LE(lin, 1.0);
  }
}

TEST(Losses, ZeroMonotonicityIffMarginsHold) {
  SplitMix64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.uniform_int(5);
    V g(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = static_cast<double>(rng.uniform_int(4));
      p[i] = static_cast<double>(rng.uniform_int(12)) - 4;
    }
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double f = g[i] >= g[j] ? 1.0 : -1.0;
        if (f * (p[i] - p[j]) < std::abs(g[i] - g[j])) ok = false;
      }
    EXPECT_EQ(loss_mon(p, g) == 0.0, ok);
  }
}

TEST(Losses, GradientsMatchFiniteDifferences) {
  SplitMix64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.uniform_int(10);
    auto p = random_vector(rng, n);
    const auto g = random_vector(rng, n);
    const double alpha = rng.uniform(0.1, 2), beta = rng.uniform(0.1, 2);
    const auto analytic = total_loss(p, g, alpha, beta).grad;
    const auto numeric = testing::numeric_gradient([&] { return total_loss(p, g, alpha, beta).total; }, p);
    for (std::size_t i = 0; i < n; ++i) EXPECT_LT(testing::relative_error(analytic[i], numeric[i]), 1e-4);
  }
}

TEST(Fusion, FuseConcatenates) {
  EXPECT_EQ(fuse(V{1, 2}, V{3}), (V{1, 2, 3}));
  EXPECT_EQ(fuse(V{1, 2}, V{}), (V{1, 2}));
  EXPECT_EQ(fuse(V{}, V{7}), (V{7}));
}

TEST(Fusion, RegressZeroWeights) {
  const TwoLayerMlp head("regressor", 3, 4, 1);
  EXPECT_EQ(regress(V{1, -2, 3}, head), 0.0);
  EXPECT_THROW(regress(V{1, 2}, head), std::invalid_argument);
}

double gelu_ref(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

TEST(Fusion, RegressHandSetClosedForm) {
  TwoLayerMlp head("regressor", 2, 2, 1);
  // W1 = [[1, 2], [-1, 0.5]], b1 = (0.1, 0), W2 = (1.5, -2), b2 = 0.3
  head.fc1_w.value.values() = {1, 2, -1, 0.5};
  head.fc1_b.value.values() = {0.1, 0};
  head.fc2_w.value.values() = {1.5, -2};
  head.fc2_b.value.values() = {0.3};
  const double expect = 1.5 * gelu_ref(3.1) - 2 * gelu_ref(-0.5) + 0.3;
  EXPECT_NEAR(regress(V{1, 1}, head), expect, 1e-12);
}

TEST(Fusion, RegressGradientMatchesFiniteDifferences) {
  SplitMix64 rng(15);
  TwoLayerMlp head("regressor", 6, 5, 1);
  head.init(rng);
  auto x = random_vector(rng, 6);
  for (auto* p : head.parameters()) p->zero_grad();
  TwoLayerMlp::Tape tape;
  regress(x, head, &tape);
  const auto dx = head.backward(tape, V{1.0}, true);
  auto f = [&] { return regress(x, head); };
  for (auto* p : head.parameters()) {
    const auto numeric = testing::numeric_gradient(f, p->value.data());
    for (std::size_t i = 0; i < numeric.size(); ++i)
      EXPECT_LT(testing::relative_error(p->grad[i], numeric[i]), 1e-4) << p->name;
  }
  const auto numeric = testing::numeric_gradient(f, x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(testing::relative_error(dx[i], numeric[i]), 1e-4);
}

ModelConfig small_config(bool spatial) {
  ModelConfig c;
  c.semantic_channels = 4;
  c.temporal_width = 8;
  c.temporal_hidden = 6;
  c.use_spatial = spatial;
  c.fragment_frames = 2;
  c.head_hidden = 5;
  c.seed = 3;
  return c;
}

VideoSample random_sample(SplitMix64& rng, const ModelConfig& c, std::size_t t, double mos) {
  VideoSample s;
  s.video_id = "v";
  s.mos = mos;
  s.semantic = Tensor({c.semantic_channels, t});
  for (auto& v : s.semantic.values()) v = rng.uniform();
  if (c.use_spatial) {
    s.fragments.frames = c.fragment_frames;
    s.fragments.side = 224;
    s.fragments.data.resize(c.fragment_frames * 224 * 224 * 3);
    for (auto& v : s.fragments.data) v = static_cast<float>(rng.uniform());
  }
  return s;
}

TEST(Model, FusedDimensionsFollowBranches) {
  auto c = small_config(true);
  EXPECT_EQ(c.fused_dim(), 4u + 2 * 49);
  c.use_semantic = false;
  EXPECT_EQ(c.fused_dim(), 98u);
  c.use_spatial = false;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Model, EndToEndGradientMatchesFiniteDifferences) {
  for (bool spatial : {false, true}) {
    const auto c = small_config(spatial);
    QualityModel model(c);
    SplitMix64 rng(16);
    const auto sample = random_sample(rng, c, 5, 0);
    model.zero_grad();
    QualityModel::Tape tape;
    model.forward(sample, &tape);
    model.backward(tape, 1.0);
    for (auto* p : model.parameters()) {
      if (!p->trainable) continue;
      for (int probe = 0; probe < 8; ++probe) {
        const std::size_t i = rng.uniform_int(p->value.size() - 1);
        const double keep = p->value[i];
        p->value[i] = keep + 1e-6;
        const double up = model.forward(sample);
        p->value[i] = keep - 1e-6;
        const double down = model.forward(sample);
        p->value[i] = keep;
        EXPECT_LT(testing::relative_error(p->grad[i], (up - down) / 2e-6), 1e-4) << p->name << "[" << i << "]";
      }
    }
  }
}

std::vector<VideoSample> learnable_set(const ModelConfig& c, std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<VideoSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double q = rng.uniform();
    auto s = random_sample(rng, c, 4, 1 + 4 * q);
    for (std::size_t t = 0; t < 4; ++t) s.semantic[t] = q;  // channel 0 carries the label
    s.video_id = "s" + std::to_string(i);
    out.push_back(std::move(s));
  }
  return out;
}

TEST(Trainer, ZeroLearningRateLeavesParametersBitExact) {
  const auto c = small_config(false);
  QualityModel model(c);
  std::vector<Tensor> before;
  for (auto* p : model.parameters()) before.push_back(p->value);
  TrainConfig tc;
  tc.lr_backbone = tc.lr_other = 0.0;
  tc.epochs = 1;
  tc.batch = 4;
  fit(model, learnable_set(c, 9, 1), tc);
  const auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) EXPECT_EQ(params[i]->value, before[i]) << params[i]->name;
}

TEST(Trainer, SameSeedGivesIdenticalLogs) {
  const auto c = small_config(false);
  const auto data = learnable_set(c, 14, 2);
  TrainConfig tc;
  tc.epochs = 6;
  tc.batch = 4;
  tc.seed = 9;
  QualityModel a(c), b(c);
  const auto ra = fit(a, data, tc);
  const auto rb = fit(b, data, tc);
  ASSERT_EQ(ra.log.size(), 6u);
  EXPECT_EQ(format_log_csv(ra.log), format_log_csv(rb.log));
  EXPECT_EQ(ra.log, rb.log);
}

TEST(Trainer, LearnsEasySignal) {
  const auto c = small_config(false);
  const auto data = learnable_set(c, 24, 3);
  TrainConfig tc;
  tc.epochs = 60;
  tc.batch = 8;
  tc.lr_other = 5e-3;
  QualityModel model(c);
  const auto result = fit(model, data, tc);
  EXPECT_GE(result.log.back().train_srocc, 0.9);
  const auto pred = predict(model, data, result.scaler, result.calibration);
  V mos;
  for (const auto& s : data) mos.push_back(s.mos);
  EXPECT_GE(srocc(pred, mos), 0.9);
}

TEST(Trainer, TrailingSingletonBatchIsMerged) {
  const auto c = small_config(false);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch = 4;
  QualityModel model(c);
  // 9 = 4 + 5; a lone ninth sample would leave the correlation undefined.
  const auto result = fit(model, learnable_set(c, 9, 4), tc);
  for (const auto& e : result.log) EXPECT_TRUE(std::isfinite(e.total));
  tc.batch = 1;
  EXPECT_THROW(tc.validate(), ValidationError);
  EXPECT_THROW(fit(model, learnable_set(c, 1, 4), TrainConfig{}), std::exception);
}

TEST(Trainer, AdamWMatchesHandStep) {
  Parameter p("p", {1});
  p.value[0] = 2.0;
  p.grad[0] = 0.5;
  TrainConfig tc;
  tc.lr_other = 0.1;
  tc.weight_decay = 0.05;
  AdamW opt({&p}, tc);
  opt.step();
  // First step: bias-corrected m/sqrt(v) = sign(g), plus decoupled decay.
  const double expect = 2.0 - 0.1 * 0.05 * 2.0 - 0.1 * 0.5 / (0.5 + 1e-8);
  EXPECT_NEAR(p.value[0], expect, 1e-12);
}

TEST(Trainer, ScalerAndCalibration) {
  const auto s = MosScaler::fit(V{2, 4, 3});
  EXPECT_EQ(s.normalize(2), 0.0);
  EXPECT_EQ(s.normalize(4), 1.0);
  EXPECT_EQ(s.denormalize(0.5), 3.0);

  const V target{0, 0.25, 0.5, 1};
  V raw;
  for (double t : target) raw.push_back(2 * t + 1);
  const auto cal = OutputCalibration::fit(raw, target);
  EXPECT_NEAR(cal.scale, 0.5, 1e-12);
  EXPECT_NEAR(cal.offset, -0.5, 1e-12);

  V reversed;
  for (double t : target) reversed.push_back(-t);
  EXPECT_EQ(OutputCalibration::fit(reversed, target).scale, 1.0);

  const auto flat = OutputCalibration::fit(V{3, 3, 3, 3}, target);
  EXPECT_EQ(flat.scale, 0.0);
  EXPECT_NEAR(flat.apply(3), 0.4375, 1e-12);
}

TEST(Checkpoint, RoundTripAndDigest) {
  const auto c = small_config(true);
  QualityModel model(c);
  TrainConfig tc;
  tc.seed = 4;
  const MosScaler scaler(1, 5);
  const OutputCalibration cal{0.5, 0.1};
  const auto dir_a = testing::scratch_dir("ckpt-a");
  const auto dir_b = testing::scratch_dir("ckpt-b");
  save_checkpoint(dir_a, model, tc, scaler, cal, "abc");
  save_checkpoint(dir_b, model, tc, scaler, cal, "abc");
  EXPECT_EQ(checkpoint_digest(dir_a), checkpoint_digest(dir_b));

  const auto ck = load_checkpoint(dir_a);
  EXPECT_EQ(ck.prompt_digest, "abc");
  EXPECT_EQ(ck.scaler.lo(), 1.0);
  EXPECT_EQ(ck.calibration.scale, 0.5);
  EXPECT_EQ(ck.train.seed, 4u);
  SplitMix64 rng(5);
  const auto sample = random_sample(rng, c, 3, 0);
  const double expect = model.forward(sample);
  EXPECT_NEAR(ck.model->forward(sample), expect, 1e-5 * std::max(1.0, std::abs(expect)));
  EXPECT_NEAR(ck.to_mos(0.2), 1 + 4 * 0.2, 1e-12);

  // Saving the reloaded model reproduces the files exactly.
  const auto dir_c = testing::scratch_dir("ckpt-c");
  save_checkpoint(dir_c, *ck.model, ck.train, ck.scaler, ck.calibration, ck.prompt_digest);
  EXPECT_EQ(checkpoint_digest(dir_c), checkpoint_digest(dir_a));

  auto other = c;
  other.seed = 99;
  QualityModel different(other);
  save_checkpoint(dir_b, different, tc, scaler, cal, "abc");
  EXPECT_NE(checkpoint_digest(dir_b), checkpoint_digest(dir_a));
}

TEST(Checkpoint, MalformedInputsRejected) {
  EXPECT_THROW(load_checkpoint(testing::scratch_dir("ckpt-empty")), std::exception);
  const auto dir = testing::scratch_dir("ckpt-bad");
  QualityModel model(small_config(false));
  save_checkpoint(dir, model, TrainConfig{}, MosScaler{}, OutputCalibration{}, "");
  std::ofstream(dir / "checkpoint.json") << "{\"format\": 1";
  EXPECT_THROW(load_checkpoint(dir), ValidationError);
  save_checkpoint(dir, model, TrainConfig{}, MosScaler{}, OutputCalibration{}, "");
  write_cache(dir / "regressor.fc2.bias.clfc", make_cache(Tensor({2}), {}));
  EXPECT_THROW(load_checkpoint(dir), ValidationError);
}

}  // namespace
}  // namespace clifvqa
