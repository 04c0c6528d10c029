#include "sphreg/datasets.hpp"

#include <cmath>
#include <numbers>

#include "sphreg/rotations.hpp"

namespace sphreg {

namespace {

constexpr std::uint64_t kLiftSeedS1 = 0x51f7a11ce5ULL;
constexpr std::uint64_t kLiftSeedS2 = 0x52f7a11ce5ULL;

Matrix make_lift(std::uint64_t seed, std::size_t dims) {
  Rng rng(seed);
  Matrix m(kLiftDim, dims);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

Vector lift_with_noise(const Matrix& lift, const Vector& y, Rng& rng, double noise) {
  Vector f = lift * y;
  if (noise > 0.0) {
    for (double& v : f) v += noise * rng.normal();
  }
  return f;
}

void require_noise(double noise) {
  if (!(noise >= 0.0)) throw DomainError("dataset generator: noise must be non-negative");
}

}  // namespace

const std::array<std::array<double, 3>, kCloudPoints>& canonical_point_cloud() noexcept {
  // Irregular on purpose: no two points related by a common rotation of the set.
  static const std::array<std::array<double, 3>, kCloudPoints> cloud{{
      {1.00, 0.10, -0.20},
      {-0.30, 0.80, 0.40},
      {0.20, -0.60, 0.90},
      {-0.70, -0.40, -0.50},
      {0.55, 0.45, 0.15},
      {-0.10, 0.30, -0.95},
      {0.85, -0.25, 0.60},
      {-0.65, 0.90, -0.35},
  }};
  return cloud;
}

const Matrix& linear_lift(SphereKind kind) {
  static const Matrix s1 = make_lift(kLiftSeedS1, 2);
  static const Matrix s2 = make_lift(kLiftSeedS2, 3);
  switch (kind) {
    case SphereKind::S1:
      return s1;
    case SphereKind::S2:
      return s2;
    case SphereKind::S3:
      break;
  }
  throw DomainError("linear_lift: s3 features come from the point cloud");
}

SyntheticDataset gen_s1(Rng& rng, std::size_t n, double noise) {
  require_noise(noise);
  SyntheticDataset ds;
  ds.kind = SphereKind::S1;
  const Matrix& lift = linear_lift(SphereKind::S1);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = rng.uniform(-std::numbers::pi, std::numbers::pi);
    Vector y{std::cos(phi), std::sin(phi)};
    Vector f = lift_with_noise(lift, y, rng, noise);
    ds.push_back(std::move(f), std::move(y));
  }
  return ds;
}

SyntheticDataset gen_s2(Rng& rng, std::size_t n, double noise) {
  require_noise(noise);
  SyntheticDataset ds;
  ds.kind = SphereKind::S2;
  const Matrix& lift = linear_lift(SphereKind::S2);
  for (std::size_t i = 0; i < n; ++i) {
    Vector y;
    // Uniform on S² folded onto the N_z < 0 hemisphere; N_z == 0 is resampled.
    do {
      y = rng.normal_vector(3);
    } while (!(y.norm() > 1e-12) || y[2] == 0.0);
    y = l2_normalize(y);
    y[2] = -std::abs(y[2]);
    Vector f = lift_with_noise(lift, y, rng, noise);
    ds.push_back(std::move(f), std::move(y));
  }
  return ds;
}

SyntheticDataset gen_s3(Rng& rng, std::size_t n, double noise) {
  require_noise(noise);
  SyntheticDataset ds;
  ds.kind = SphereKind::S3;
  const auto& cloud = canonical_point_cloud();
  for (std::size_t i = 0; i < n; ++i) {
    const Quaternion q = sample_uniform_so3(rng);
    const RotationMatrix r = quat_to_matrix(q);
    Vector f(3 * kCloudPoints);
    for (std::size_t k = 0; k < kCloudPoints; ++k) {
      const auto p = r.apply(cloud[k]);
      for (std::size_t j = 0; j < 3; ++j) f[3 * k + j] = p[j];
    }
    if (noise > 0.0) {
      for (double& v : f) v += noise * rng.normal();
    }
    ds.push_back(std::move(f), q.to_vector());
  }
  return ds;
}

SyntheticDataset generate(SphereKind kind, Rng& rng, std::size_t n, double noise) {
  switch (kind) {
    case SphereKind::S1:
      return gen_s1(rng, n, noise);
    case SphereKind::S2:
      return gen_s2(rng, n, noise);
    case SphereKind::S3:
      return gen_s3(rng, n, noise);
  }
  throw DomainError("generate: unknown task");
}

Vector rotate_target(const Vector& y, SphereKind kind, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  switch (kind) {
    case SphereKind::S1:
      if (y.size() != 2) throw DimensionError("rotate_target: expected 2 components");
      return {c * y[0] - s * y[1], s * y[0] + c * y[1]};
    case SphereKind::S2:
      if (y.size() != 3) throw DimensionError("rotate_target: expected 3 components");
      return {c * y[0] - s * y[1], s * y[0] + c * y[1], y[2]};
    case SphereKind::S3:
      break;
  }
  throw DomainError("pre-rotation is only defined for s1 and s2 targets");
}

SyntheticDataset apply_pre_rotation(const SyntheticDataset& data, double angle) {
  SyntheticDataset out;
  out.kind = data.kind;
  if (data.kind == SphereKind::S3) {
    throw DomainError("pre-rotation is only defined for s1 and s2 targets");
  }
  out.features = data.features;
  out.raw_targets.reserve(data.size());
  out.targets.reserve(data.size());
  for (const Vector& y : data.raw_targets) {
    Vector r = rotate_target(y, data.kind, angle);
    out.targets.push_back(encode_target(r, data.kind));
    out.raw_targets.push_back(std::move(r));
  }
  return out;
}

}  // namespace sphreg
