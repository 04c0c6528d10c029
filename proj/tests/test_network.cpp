#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sphreg/datasets.hpp"
#include "sphreg/network.hpp"

using namespace sphreg;

namespace {

Architecture toy(std::optional<ActivationKind> act, SphereKind kind = SphereKind::S3) {
  return Architecture{4, {6, 5}, sphere_dims(kind), sign_classes(kind), act};
}

// He-initialized weights plus small random biases, so no trunk is fully dead.
MlpModel random_model(const Architecture& arch, Rng& rng) {
  MlpModel m = MlpModel::create(arch, rng);
  for (auto& t : m.parameters()) {
    if (t.name.ends_with(".bias")) {
      for (double& v : t.values) v = rng.normal(0.0, 0.1);
    }
  }
  return m;
}

Vector target_for(Rng& rng, SphereKind kind) {
  Vector y = l2_normalize(rng.normal_vector(sphere_dims(kind)));
  if (kind == SphereKind::S2) y[2] = -std::abs(y[2]);
  if (kind == SphereKind::S3) y[0] = std::abs(y[0]);
  return y;
}

}  // namespace

TEST(Forward, ZeroModelUnderSexpIsUniformPositive) {
  MlpModel m(toy(ActivationKind::SphericalExp));
  const ForwardResult r = m.forward(Vector{1, -2, 3, 0.5});
  EXPECT_EQ(r.embedding, Vector(4));
  for (double p : r.output) EXPECT_NEAR(p, 0.5, 1e-15);
  EXPECT_EQ(r.logits, Vector(8));
}

TEST(Forward, IdentityLayerWithoutActivationPassesInputThrough) {
  MlpModel m(Architecture{2, {}, 2, 4, std::nullopt});
  m.reg_head().weight = Matrix::identity(2);
  const Vector x{0.3, -0.7};
  EXPECT_EQ(m.forward(x).output, x);
  EXPECT_THROW(m.forward(Vector{1, 2, 3}), DimensionError);
}

TEST(Forward, OutputsOnSphere) {
  Rng rng(1);
  for (auto act : {ActivationKind::SphericalExp, ActivationKind::SphericalFlat}) {
    for (int t = 0; t < 100; ++t) {
      MlpModel m = random_model(toy(act), rng);
      EXPECT_NEAR(m.forward(rng.normal_vector(4)).output.norm(), 1.0, 1e-12);
    }
  }
}

TEST(Backward, BeforeForwardThrows) {
  Rng rng(2);
  const MlpModel m = MlpModel::create(toy(ActivationKind::SphericalExp), rng);
  EXPECT_THROW((void)m.backward(Vector(4), Vector(8)), std::logic_error);
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
  Rng rng(3);
  MlpModel m = MlpModel::create(toy(ActivationKind::SphericalExp), rng);
  m.forward(rng.normal_vector(4));
  for (double g : MlpModel::flatten(m.backward(Vector(4), Vector(8)))) EXPECT_EQ(g, 0.0);
}

TEST(Backward, SexpCosineEmbeddingGradientIsJacobianTransposeProduct) {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    MlpModel m = MlpModel::create(toy(ActivationKind::SphericalExp), rng);
    const ForwardResult r = m.forward(rng.normal_vector(4));
    const SphereTarget target = encode_target(target_for(rng, SphereKind::S3), SphereKind::S3);
    const LossValue lv = cosine_proximity_loss(r.output, target.abs);
    const Gradients g = m.backward(lv.grad_abs, Vector(8));
    const Vector expected = transpose_times(sexp_jacobian(r.output), -1.0 * target.abs);
    EXPECT_LE(max_abs_diff(g.grad_embedding, expected), 1e-15);
    EXPECT_LE(g.grad_embedding.norm(), 1.0 + 1e-12);
    // Jacobian columns are tangent to the sphere at P.
    const Vector d = rng.normal_vector(4);
    EXPECT_NEAR(dot(r.output, sexp_jacobian(r.output) * d), 0.0, 1e-12);
  }
}

TEST(Backward, ParameterGradientsMatchFiniteDifferencesOnToyModel) {
  struct Case {
    std::optional<ActivationKind> act;
    RegressionLoss loss;
  };
  const Case cases[] = {{std::nullopt, RegressionLoss::SmoothL1},
                        {std::nullopt, RegressionLoss::L2},
                        {ActivationKind::SphericalFlat, RegressionLoss::Cosine},
                        {ActivationKind::SphericalFlat, RegressionLoss::L2},
                        {ActivationKind::SphericalExp, RegressionLoss::Cosine},
                        {ActivationKind::SphericalExp, RegressionLoss::L2},
                        {ActivationKind::SphericalExp, RegressionLoss::XentSquares}};
  Rng rng(5);
  for (const Case& c : cases) {
    int checked = 0;
    while (checked < 20) {
      MlpModel m = random_model(toy(c.act), rng);
      ASSERT_LE(m.parameter_count(), 500u);
      const Vector x = rng.normal_vector(4);
      const Vector y = target_for(rng, SphereKind::S3);
      const SphereTarget target = encode_target(y, SphereKind::S3);
      const ForwardResult fwd = m.forward(x);
      if (m.relu_margin() < 1e-3) continue;
      bool kink = false;
      if (c.loss == RegressionLoss::SmoothL1) {
        for (std::size_t i = 0; i < 4; ++i) kink |= std::abs(std::abs(y[i] - fwd.output[i]) - 1) < 1e-3;
      }
      if (kink) continue;
      const bool sign = c.act.has_value();
      const SampleLoss sl = sample_loss(fwd, y, target, c.loss, sign, 1.0);
      const auto analytic = MlpModel::flatten(m.backward(sl.grad_output, sl.grad_logits));
      std::size_t idx = 0;
      for (auto& t : m.parameters()) {
        for (double& v : t.values) {
          const double saved = v;
          v = saved + 1e-5;
          const double up = sample_loss(m.forward(x), y, target, c.loss, sign, 1.0).value;
          v = saved - 1e-5;
          const double down = sample_loss(m.forward(x), y, target, c.loss, sign, 1.0).value;
          v = saved;
          EXPECT_LT(relative_error(analytic[idx], (up - down) / 2e-5), 1e-5) << t.name;
          ++idx;
        }
      }
      ++checked;
    }
  }
}

TEST(Backward, DirectModeLeavesSignHeadUntouched) {
  Rng rng(6);
  MlpModel m = MlpModel::create(toy(std::nullopt), rng);
  const Vector y = target_for(rng, SphereKind::S3);
  const ForwardResult fwd = m.forward(rng.normal_vector(4));
  const SampleLoss sl =
      sample_loss(fwd, y, encode_target(y, SphereKind::S3), RegressionLoss::SmoothL1, false, 1.0);
  const Gradients g = m.backward(sl.grad_output, sl.grad_logits);
  for (double v : g.sign_head.weight.values()) EXPECT_EQ(v, 0.0);
  for (double v : g.sign_head.bias) EXPECT_EQ(v, 0.0);
}

TEST(Sgd, ZeroRateAndArithmetic) {
  Rng rng(7);
  MlpModel m = MlpModel::create(Architecture{1, {}, 2, 4, std::nullopt}, rng);
  const MlpModel before = m;
  m.forward(Vector{1.0});
  Gradients g = m.backward(Vector{1, 1}, Vector{1, 1, 1, 1});
  m.sgd_step(g, 0.0);
  for (std::size_t i = 0; i < m.parameters().size(); ++i) {
    const auto a = m.parameters()[i].values;
    const auto b = before.parameters()[i].values;
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }

  m.reg_head().weight(0, 0) = 1.0;
  g.set_zero();
  g.reg_head.weight(0, 0) = 2.0;
  m.sgd_step(g, 0.1);
  EXPECT_DOUBLE_EQ(m.reg_head().weight(0, 0), 0.8);
}

TEST(Sgd, NonFiniteGradientNamesBlock) {
  Rng rng(8);
  MlpModel m = MlpModel::create(toy(ActivationKind::SphericalExp), rng);
  Gradients g = m.zero_gradients();
  g.sign_head.bias[1] = std::numeric_limits<double>::quiet_NaN();
  try {
    m.sgd_step(g, 0.1);
    FAIL() << "expected NonFiniteError";
  } catch (const NonFiniteError& e) {
    EXPECT_NE(std::string(e.what()).find("sign_head"), std::string::npos);
  }
  g = m.zero_gradients();
  g.trunk[1].weight(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(m.sgd_step(g, 0.1), NonFiniteError);
  EXPECT_THROW(m.sgd_step(m.zero_gradients(), -1.0), DomainError);
}

TEST(Sgd, LossDecreasesOnSeparableSignTask) {
  // Sign classes of S1 targets are read directly off the features.
  Rng rng(9);
  MlpModel m = MlpModel::create(Architecture{2, {8}, 2, 4, ActivationKind::SphericalExp}, rng);
  std::vector<Vector> xs;
  std::vector<int> cls;
  for (int i = 0; i < 64; ++i) {
    const Vector x = rng.normal_vector(2);
    xs.push_back(x);
    cls.push_back(encode_target(l2_normalize(x), SphereKind::S1).sign_class);
  }
  auto epoch_loss = [&]() {
    double l = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) l += sign_xent_loss(m.forward(xs[i]).logits, cls[i]).value;
    return l / xs.size();
  };
  const double start = epoch_loss();
  std::vector<double> trace;
  for (int step = 0; step < 100; ++step) {
    Gradients acc = m.zero_gradients();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const ForwardResult f = m.forward(xs[i]);
      m.accumulate_backward(Vector(2), sign_xent_loss(f.logits, cls[i]).grad_logits, acc);
    }
    acc *= 1.0 / xs.size();
    m.sgd_step(acc, 0.5);
    if (step % 10 == 9) trace.push_back(epoch_loss());
  }
  EXPECT_LT(trace.back(), 0.5 * start);
  for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] + 1e-9);
}

TEST(Train, OneEpochFullBatchGivesOneRecord) {
  Rng rng(10);
  const SyntheticDataset data = gen_s1(rng, 32, 0.01);
  MlpModel m = MlpModel::create(default_architecture(kLiftDim, SphereKind::S1, ActivationKind::SphericalExp), rng);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 32;
  const TrainResult r = train(m, data, cfg);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].epoch, 0u);
  EXPECT_EQ(r.records[0].batch, 0u);
  EXPECT_GE(r.records[0].grad_O_norm, 0.0);
}

TEST(Train, DeterministicGivenSeed) {
  Rng rng(11);
  const SyntheticDataset data = gen_s3(rng, 200, 0.01);
  const MlpModel m = MlpModel::create(toy(ActivationKind::SphericalExp), rng);
  Architecture arch = default_architecture(24, SphereKind::S3, ActivationKind::SphericalExp);
  Rng init(5);
  const MlpModel m2 = MlpModel::create(arch, init);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  cfg.seed = 77;
  const TrainResult a = train(m2, data, cfg), b = train(m2, data, cfg);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].loss, b.records[i].loss);
    EXPECT_EQ(a.records[i].grad_O_norm, b.records[i].grad_O_norm);
  }
  cfg.seed = 78;
  const TrainResult c = train(m2, data, cfg);
  EXPECT_NE(a.records.back().loss, c.records.back().loss);
  (void)m;
}

TEST(Train, SexpCosineGradientNormBounded) {
  Rng rng(12);
  const SyntheticDataset data = gen_s3(rng, 512, 0.01);
  const MlpModel m = MlpModel::create(default_architecture(24, SphereKind::S3, ActivationKind::SphericalExp), rng);
  TrainConfig cfg;
  cfg.epochs = 5;
  const TrainResult r = train(m, data, cfg);
  for (const auto& rec : r.records) EXPECT_LE(rec.grad_O_norm, 1.0 + 1e-9);
}

TEST(Train, DivergenceReportsBatch) {
  Rng rng(13);
  const SyntheticDataset data = gen_s1(rng, 64, 0.01);
  const MlpModel m = MlpModel::create(default_architecture(kLiftDim, SphereKind::S1, std::nullopt), rng);
  TrainConfig cfg;
  cfg.loss = RegressionLoss::L2;
  cfg.learning_rate = 1e12;
  cfg.batch_size = 8;
  try {
    train(m, data, cfg);
    FAIL() << "expected divergence";
  } catch (const TrainingDiverged& e) {
    EXPECT_NE(std::string(e.what()).find("batch " + std::to_string(e.batch())), std::string::npos);
  }
}

TEST(Train, RejectsBadConfig) {
  Rng rng(14);
  const SyntheticDataset data = gen_s1(rng, 8, 0.0);
  const MlpModel m = MlpModel::create(default_architecture(kLiftDim, SphereKind::S1, std::nullopt), rng);
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(train(m, data, cfg), DomainError);
  cfg.epochs = 1;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(train(m, data, cfg), DomainError);
  const MlpModel wrong = MlpModel::create(default_architecture(kLiftDim, SphereKind::S2, std::nullopt), rng);
  EXPECT_THROW(train(wrong, data, TrainConfig{}), DimensionError);
}

TEST(Checkpoint, RoundTripIsBitwise) {
  Rng rng(15);
  const MlpModel m = MlpModel::create(default_architecture(24, SphereKind::S3, ActivationKind::SphericalFlat), rng);
  std::stringstream ss;
  save_checkpoint(ss, m);
  const MlpModel back = load_checkpoint(ss);
  EXPECT_EQ(back.activation(), m.activation());
  EXPECT_EQ(back.architecture().hidden, m.architecture().hidden);
  const auto a = m.parameters(), b = back.parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_TRUE(std::equal(a[i].values.begin(), a[i].values.end(), b[i].values.begin()));
  }
}

TEST(Checkpoint, RejectsMalformedInput) {
  std::stringstream bad_header("not-a-checkpoint 1\n");
  EXPECT_THROW(load_checkpoint(bad_header), DomainError);
  std::stringstream bad_version("sphreg-checkpoint 2\n");
  EXPECT_THROW(load_checkpoint(bad_version), DomainError);
  std::stringstream truncated("sphreg-checkpoint 1\nactivation sexp\ntensor reg_head.weight 2 2\n1 2 3\n");
  EXPECT_THROW(load_checkpoint(truncated), DomainError);
}

TEST(Predict, MergesSignsAndFallsBack) {
  ForwardResult f;
  f.output = Vector{0.6, 0.8};
  f.logits = Vector{0, 5, 0, 0};
  EXPECT_LE(max_abs_diff(predict_target(f, SphereKind::S1, true), Vector{0.6, -0.8}), 1e-15);
  f.output = Vector{0, 0};
  EXPECT_EQ(predict_target(f, SphereKind::S1, false), (Vector{1, 0}));
}
