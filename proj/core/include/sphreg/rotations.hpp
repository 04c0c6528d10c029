#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "sphreg/numeric.hpp"

namespace sphreg {

/// Euler angles in radians.
///
/// Convention: R(a, e, t) = R_z(t) · R_x(e) · R_y(a)
///   azimuth   a  about the vertical y axis, canonical range [-π, π)
///   elevation e  about the x axis,           range [-π/2, π/2]
///   in-plane  t  about the camera z axis,    canonical range [-π, π)
struct EulerAngles {
  double azimuth = 0.0;
  double elevation = 0.0;
  double inplane = 0.0;
};

/// 3×3 rotation (orthogonal, det +1). Construction through from_matrix()
/// validates; the named factories produce valid matrices by construction.
class RotationMatrix {
 public:
  static constexpr double kTolerance = 1e-9;

  RotationMatrix() noexcept : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

  /// Throws DomainError unless mᵀm = I and det m = +1 within kTolerance.
  static RotationMatrix from_matrix(const Matrix& m);
  static RotationMatrix about_x(double angle) noexcept;
  static RotationMatrix about_y(double angle) noexcept;
  static RotationMatrix about_z(double angle) noexcept;

  double operator()(std::size_t r, std::size_t c) const noexcept { return m_[r * 3 + c]; }

  [[nodiscard]] Matrix to_matrix() const;
  [[nodiscard]] RotationMatrix transpose() const noexcept;
  [[nodiscard]] double trace() const noexcept { return m_[0] + m_[4] + m_[8]; }
  [[nodiscard]] std::array<double, 3> apply(const std::array<double, 3>& v) const noexcept;
  [[nodiscard]] double frobenius_distance(const RotationMatrix& other) const noexcept;

  friend RotationMatrix operator*(const RotationMatrix& a, const RotationMatrix& b) noexcept;

 private:
  explicit RotationMatrix(const std::array<double, 9>& m) noexcept : m_(m) {}
  std::array<double, 9> m_;
};

/// Quaternion a + b·i + c·j + d·k, real part first. Producers in this module
/// return unit quaternions on the canonical hemisphere (see canonical()); the
/// type itself also carries -q so the double cover can be expressed.
struct Quaternion {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  [[nodiscard]] double norm() const noexcept;
  [[nodiscard]] Quaternion operator-() const noexcept { return {-a, -b, -c, -d}; }
  [[nodiscard]] Vector to_vector() const { return {a, b, c, d}; }
  static Quaternion from_vector(const Vector& v);

  /// Sign representative with a > 0. When a == 0 exactly, the first nonzero
  /// of (b, c, d) is made positive.
  [[nodiscard]] Quaternion canonical() const noexcept;
  [[nodiscard]] bool is_canonical() const noexcept;

  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

double quat_dot(const Quaternion& p, const Quaternion& q) noexcept;

/// Rotation by `angle` in [0, π] about unit `axis`.
struct AxisAngle {
  std::array<double, 3> axis{1.0, 0.0, 0.0};
  double angle = 0.0;
};

RotationMatrix euler_to_matrix(const EulerAngles& angles);

/// Inverse of euler_to_matrix off the gimbal-lock band. Throws
/// DegenerateError when |elevation| ≥ π/2 - 1e-6.
EulerAngles matrix_to_euler(const RotationMatrix& r);
inline constexpr double kGimbalMargin = 1e-6;

/// Throws DomainError when |‖q‖ - 1| > 1e-9. q and -q map to the same matrix.
RotationMatrix quat_to_matrix(const Quaternion& q);

/// Canonical-hemisphere unit quaternion for R.
Quaternion matrix_to_quat(const RotationMatrix& r);

Quaternion axis_angle_to_quat(const AxisAngle& aa);

/// θ = 2·acos(a); returns axis e_x when θ < 1e-9.
AxisAngle quat_to_axis_angle(const Quaternion& q);

/// Rotation angle of R_gtᵀ·R_pr in [0, π].
double geodesic_distance(const RotationMatrix& gt, const RotationMatrix& pred) noexcept;

/// n Haar-uniform rotations as canonical quaternions.
std::vector<Quaternion> sample_uniform_so3(Rng& rng, std::size_t n);
Quaternion sample_uniform_so3(Rng& rng);

/// Wrap an angle into [-π, π).
double wrap_angle(double angle) noexcept;

/// Text format: one rotation per line, "a b c d", 9 significant digits.
/// The reader renormalizes each line (rejecting norms off by more than 1e-6)
/// and canonicalizes the hemisphere.
void write_quaternions(std::ostream& os, const std::vector<Quaternion>& qs);
std::vector<Quaternion> read_quaternions(std::istream& is);

}  // namespace sphreg
