#pragma once

#include <array>

#include "sphreg/dataset.hpp"
#include "sphreg/numeric.hpp"

namespace sphreg {

/// Feature width of the s1/s2 linear lifts.
inline constexpr std::size_t kLiftDim = 16;
/// Number of points in the canonical s3 point cloud (features are 3 × this).
inline constexpr std::size_t kCloudPoints = 8;

/// The fixed, asymmetric point cloud rotated to produce s3 features.
const std::array<std::array<double, 3>, kCloudPoints>& canonical_point_cloud() noexcept;

/// Fixed lift matrix (kLiftDim × dims) used by gen_s1 / gen_s2. Generated
/// from a constant seed so train and test splits share it.
const Matrix& linear_lift(SphereKind kind);

/// φ ~ U[-π, π), Y = [cos φ, sin φ], feature = lift·Y + N(0, σ²).
SyntheticDataset gen_s1(Rng& rng, std::size_t n, double noise);

/// Uniform unit normals with N_z < 0, feature = lift·Y + N(0, σ²).
SyntheticDataset gen_s2(Rng& rng, std::size_t n, double noise);

/// Haar-uniform q, feature = flattened R(q)·cloud + N(0, σ²), Y = q (a ≥ 0).
SyntheticDataset gen_s3(Rng& rng, std::size_t n, double noise);

SyntheticDataset generate(SphereKind kind, Rng& rng, std::size_t n, double noise);

/// Rotate every target by a fixed angle (S1: angle addition, S2: about z)
/// and re-encode sign classes. Features are untouched. S3 throws DomainError.
SyntheticDataset apply_pre_rotation(const SyntheticDataset& data, double angle);

/// The same rotation applied to a single target vector.
Vector rotate_target(const Vector& y, SphereKind kind, double angle);

}  // namespace sphreg
