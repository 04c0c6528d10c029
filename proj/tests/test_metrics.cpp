#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sphreg/metrics.hpp"

using namespace sphreg;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

TEST(Summarize, AccuracyIsStrictFraction) {
  const EvalReport r = summarize_errors({10 * kDeg, 40 * kDeg});
  EXPECT_EQ(r.count, 2u);
  EXPECT_EQ(r.acc_pi6, 0.5);
  EXPECT_NEAR(r.med_err, 25.0, 1e-12);
  EXPECT_NEAR(r.mean_err, 25.0, 1e-12);
  // Exactly on the threshold does not count.
  EXPECT_EQ(summarize_errors({std::numbers::pi / 6}).acc_pi6, 0.0);
  EXPECT_EQ(summarize_errors({std::nextafter(std::numbers::pi / 6, 0.0)}).acc_pi6, 1.0);
}

TEST(Summarize, MedianOddAndEven) {
  const EvalReport r = summarize_errors({30 * kDeg, 10 * kDeg, 20 * kDeg});
  EXPECT_NEAR(r.med_err, 20.0, 1e-12);
  EXPECT_EQ(r.median_err, r.med_err);
  EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
  EXPECT_THROW(summarize_errors({}), DomainError);
  EXPECT_THROW(median({}), DomainError);
}

TEST(Summarize, ThresholdsAreNested) {
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> errs(1 + rng.uniform_index(50));
    for (double& e : errs) e = rng.uniform(0.0, std::numbers::pi);
    const EvalReport r = summarize_errors(errs);
    EXPECT_LE(r.acc_pi24, r.acc_pi12);
    EXPECT_LE(r.acc_pi12, r.acc_pi6);
    EXPECT_LE(r.acc_11_25, r.acc_22_5);
    EXPECT_LE(r.acc_22_5, r.acc_30);
    EXPECT_EQ(r.acc_30, r.acc_pi6);
    EXPECT_GE(r.acc_pi24, 0.0);
    EXPECT_LE(r.acc_pi6, 1.0);
  }
}

TEST(EvalRotation, IdenticalPredictionsArePerfect) {
  Rng rng(2);
  const auto qs = sample_uniform_so3(rng, 100);
  const EvalReport r = eval_rotation(qs, qs);
  EXPECT_LT(r.med_err, 1e-5);
  EXPECT_EQ(r.acc_pi24, 1.0);
}

TEST(EvalRotation, KnownAngle) {
  const std::vector<EulerAngles> gt{{0, 0, 0}, {0.5, 0, 0}};
  const std::vector<EulerAngles> pred{{0, 0, 20 * kDeg}, {0.5 + 40 * kDeg, 0, 0}};
  const EvalReport r = eval_rotation(pred, gt);
  EXPECT_NEAR(r.med_err, 30.0, 1e-9);
  EXPECT_EQ(r.acc_pi6, 0.5);
}

TEST(EvalRotation, QuaternionAndMatrixAgree) {
  Rng rng(3);
  const auto p = sample_uniform_so3(rng, 500), g = sample_uniform_so3(rng, 500);
  std::vector<RotationMatrix> pm, gm;
  std::vector<double> errs;
  for (std::size_t i = 0; i < p.size(); ++i) {
    pm.push_back(quat_to_matrix(p[i]));
    gm.push_back(quat_to_matrix(g[i]));
    errs.push_back(oracle::quat_angle(p[i].to_vector().values(), g[i].to_vector().values()));
  }
  const EvalReport a = eval_rotation(p, g), b = eval_rotation(pm, gm);
  const EvalReport ref = summarize_errors(errs);
  EXPECT_NEAR(a.med_err, b.med_err, 1e-9);
  EXPECT_NEAR(a.med_err, ref.med_err, 1e-6);
  EXPECT_NEAR(a.mean_err, ref.mean_err, 1e-6);
  EXPECT_EQ(a.acc_pi6, b.acc_pi6);
}

TEST(EvalRotation, LengthChecks) {
  EXPECT_THROW(eval_rotation(std::vector<Quaternion>{}, std::vector<Quaternion>{}), DomainError);
  EXPECT_THROW(eval_rotation(std::vector<Quaternion>(2), std::vector<Quaternion>(3)),
               DimensionError);
}

TEST(EvalNormals, RightAngleAndAntipode) {
  const EvalReport r = eval_normals({Vector{1, 0, 0}}, {Vector{0, 1, 0}});
  EXPECT_NEAR(r.med_err, 90.0, 1e-12);
  EXPECT_EQ(r.acc_30, 0.0);
  const EvalReport a = eval_normals({Vector{0, 0, -1}}, {Vector{0, 0, 1}});
  EXPECT_NEAR(a.med_err, 180.0, 1e-12);
  const EvalReport same = eval_normals({Vector{0, 0, -1}}, {Vector{0, 0, -1}});
  EXPECT_EQ(same.med_err, 0.0);
  EXPECT_EQ(same.acc_11_25, 1.0);
}

TEST(EvalNormals, RejectsBadInput) {
  EXPECT_THROW(eval_normals({Vector{1, 1, 0}}, {Vector{0, 1, 0}}), DomainError);
  EXPECT_THROW(eval_normals({Vector{1, 0}}, {Vector{0, 1}}), DimensionError);
}
