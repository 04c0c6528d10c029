#include "sphreg/rotations.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace sphreg {

namespace {

constexpr double kPi = std::numbers::pi;

double det3(const Matrix& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

}  // namespace

// ---------------------------------------------------------------- RotationMatrix

RotationMatrix RotationMatrix::from_matrix(const Matrix& m) {
  if (m.rows() != 3 || m.cols() != 3) throw DimensionError("RotationMatrix: expected 3x3");
  if (!m.all_finite()) throw NonFiniteError("RotationMatrix: non-finite entries");
  const Matrix gram = m.transpose() * m;
  if (max_abs_diff(gram, Matrix::identity(3)) > kTolerance) {
    throw DomainError("RotationMatrix: matrix is not orthogonal");
  }
  if (std::abs(det3(m) - 1.0) > kTolerance) {
    throw DomainError("RotationMatrix: determinant is not +1");
  }
  std::array<double, 9> a{};
  std::copy(m.values().begin(), m.values().end(), a.begin());
  return RotationMatrix(a);
}

RotationMatrix RotationMatrix::about_x(double angle) noexcept {
  const double c = std::cos(angle), s = std::sin(angle);
  return RotationMatrix({1, 0, 0, 0, c, -s, 0, s, c});
}

RotationMatrix RotationMatrix::about_y(double angle) noexcept {
  const double c = std::cos(angle), s = std::sin(angle);
  return RotationMatrix({c, 0, s, 0, 1, 0, -s, 0, c});
}

RotationMatrix RotationMatrix::about_z(double angle) noexcept {
  const double c = std::cos(angle), s = std::sin(angle);
  return RotationMatrix({c, -s, 0, s, c, 0, 0, 0, 1});
}

Matrix RotationMatrix::to_matrix() const {
  Matrix m(3, 3);
  std::copy(m_.begin(), m_.end(), m.data());
  return m;
}

RotationMatrix RotationMatrix::transpose() const noexcept {
  return RotationMatrix({m_[0], m_[3], m_[6], m_[1], m_[4], m_[7], m_[2], m_[5], m_[8]});
}

std::array<double, 3> RotationMatrix::apply(const std::array<double, 3>& v) const noexcept {
  return {m_[0] * v[0] + m_[1] * v[1] + m_[2] * v[2],
          m_[3] * v[0] + m_[4] * v[1] + m_[5] * v[2],
          m_[6] * v[0] + m_[7] * v[1] + m_[8] * v[2]};
}

double RotationMatrix::frobenius_distance(const RotationMatrix& other) const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < 9; ++i) {
    const double d = m_[i] - other.m_[i];
    s += d * d;
  }
  return std::sqrt(s);
}

RotationMatrix operator*(const RotationMatrix& a, const RotationMatrix& b) noexcept {
  std::array<double, 9> out{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += a.m_[i * 3 + k] * b.m_[k * 3 + j];
      out[i * 3 + j] = s;
    }
  return RotationMatrix(out);
}

// ---------------------------------------------------------------- Quaternion

double Quaternion::norm() const noexcept { return std::sqrt(a * a + b * b + c * c + d * d); }

Quaternion Quaternion::from_vector(const Vector& v) {
  if (v.size() != 4) throw DimensionError("Quaternion::from_vector: expected 4 components");
  return {v[0], v[1], v[2], v[3]};
}

Quaternion Quaternion::canonical() const noexcept {
  if (a > 0.0) return *this;
  if (a < 0.0) return -*this;
  for (double x : {b, c, d}) {
    if (x > 0.0) return *this;
    if (x < 0.0) return -*this;
  }
  return *this;
}

bool Quaternion::is_canonical() const noexcept { return canonical() == *this; }

double quat_dot(const Quaternion& p, const Quaternion& q) noexcept {
  return p.a * q.a + p.b * q.b + p.c * q.c + p.d * q.d;
}

// ---------------------------------------------------------------- conversions

RotationMatrix euler_to_matrix(const EulerAngles& angles) {
  return RotationMatrix::about_z(angles.inplane) * RotationMatrix::about_x(angles.elevation) *
         RotationMatrix::about_y(angles.azimuth);
}

// For R = R_z(t) R_x(e) R_y(a):
//   row 2    = [-cos e sin a, sin e, cos e cos a]
//   column 1 = [-sin t cos e, cos t cos e, sin e]
EulerAngles matrix_to_euler(const RotationMatrix& r) {
  const double cos_e = std::hypot(r(2, 0), r(2, 2));
  const double elevation = std::atan2(r(2, 1), cos_e);
  if (std::abs(elevation) >= kPi / 2 - kGimbalMargin) {
    throw DegenerateError("matrix_to_euler: elevation in gimbal-lock band");
  }
  EulerAngles out;
  out.elevation = elevation;
  out.azimuth = wrap_angle(std::atan2(-r(2, 0), r(2, 2)));
  out.inplane = wrap_angle(std::atan2(-r(0, 1), r(1, 1)));
  return out;
}

RotationMatrix quat_to_matrix(const Quaternion& q) {
  const double n = q.norm();
  if (std::abs(n - 1.0) > 1e-9) throw DomainError("quat_to_matrix: quaternion is not unit");
  const double a = q.a / n, b = q.b / n, c = q.c / n, d = q.d / n;
  Matrix m{{1 - 2 * (c * c + d * d), 2 * (b * c - a * d), 2 * (b * d + a * c)},
           {2 * (b * c + a * d), 1 - 2 * (b * b + d * d), 2 * (c * d - a * b)},
           {2 * (b * d - a * c), 2 * (c * d + a * b), 1 - 2 * (b * b + c * c)}};
  return RotationMatrix::from_matrix(m);
}

Quaternion matrix_to_quat(const RotationMatrix& r) {
  // Shepperd: pivot on the largest of (tr, R00, R11, R22) to avoid cancellation.
  const double tr = r.trace();
  Quaternion q;
  if (tr >= r(0, 0) && tr >= r(1, 1) && tr >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    q = {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s};
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    q = {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s};
  } else if (r(1, 1) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 - r(0, 0) + r(1, 1) - r(2, 2));
    q = {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s};
  } else {
    const double s = 2.0 * std::sqrt(1.0 - r(0, 0) - r(1, 1) + r(2, 2));
    q = {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s};
  }
  const double n = q.norm();
  q = {q.a / n, q.b / n, q.c / n, q.d / n};
  return q.canonical();
}

Quaternion axis_angle_to_quat(const AxisAngle& aa) {
  const auto& v = aa.axis;
  const double axis_norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (std::abs(axis_norm - 1.0) > 1e-9) throw DomainError("axis_angle_to_quat: axis is not unit");
  if (aa.angle < 0.0 || aa.angle > kPi) {
    throw DomainError("axis_angle_to_quat: angle outside [0, pi]");
  }
  const double h = 0.5 * aa.angle;
  const double s = std::sin(h);
  return Quaternion{std::cos(h), s * v[0], s * v[1], s * v[2]}.canonical();
}

AxisAngle quat_to_axis_angle(const Quaternion& q_in) {
  if (std::abs(q_in.norm() - 1.0) > 1e-9) {
    throw DomainError("quat_to_axis_angle: quaternion is not unit");
  }
  const Quaternion q = q_in.canonical();
  const double vec_norm = std::sqrt(q.b * q.b + q.c * q.c + q.d * q.d);
  // atan2 keeps precision near θ = 0 where acos(a) does not.
  const double angle = 2.0 * std::atan2(vec_norm, q.a);
  if (angle < 1e-9) return AxisAngle{};
  return AxisAngle{{q.b / vec_norm, q.c / vec_norm, q.d / vec_norm}, angle};
}

double geodesic_distance(const RotationMatrix& gt, const RotationMatrix& pred) noexcept {
  // Angle of M = gtᵀ·pred from cos θ = (tr M - 1)/2 and sin θ = ‖vee(M - Mᵀ)‖/2;
  // atan2 keeps full precision near 0 and π where acos of the trace does not.
  std::array<double, 9> m{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 3; ++k) m[i * 3 + j] += gt(k, i) * pred(k, j);
  const double c = (m[0] + m[4] + m[8] - 1.0) / 2.0;
  const double x = m[7] - m[5], y = m[2] - m[6], z = m[3] - m[1];
  const double s = std::sqrt(x * x + y * y + z * z) / 2.0;
  return std::atan2(s, c);
}

Quaternion sample_uniform_so3(Rng& rng) {
  // Isotropic Gaussian in R^4 projected to S^3 is uniform on S^3, which
  // pushes forward to Haar measure on SO(3).
  for (;;) {
    Quaternion q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    const double n = q.norm();
    if (n < 1e-12) continue;
    return Quaternion{q.a / n, q.b / n, q.c / n, q.d / n}.canonical();
  }
}

std::vector<Quaternion> sample_uniform_so3(Rng& rng, std::size_t n) {
  if (n == 0) throw DomainError("sample_uniform_so3: n must be at least 1");
  std::vector<Quaternion> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_uniform_so3(rng));
  return out;
}

double wrap_angle(double angle) noexcept {
  double w = std::fmod(angle + kPi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  w -= kPi;
  // fmod rounding can land exactly on +π.
  return w >= kPi ? -kPi : w;
}

void write_quaternions(std::ostream& os, const std::vector<Quaternion>& qs) {
  char buf[128];
  for (const auto& q : qs) {
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %.9g\n", q.a, q.b, q.c, q.d);
    os << buf;
  }
}

std::vector<Quaternion> read_quaternions(std::istream& is) {
  std::vector<Quaternion> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    Quaternion q;
    if (!(ls >> q.a >> q.b >> q.c >> q.d)) {
      throw DomainError("read_quaternions: malformed line " + std::to_string(lineno));
    }
    const double n = q.norm();
    if (std::abs(n - 1.0) > 1e-6) {
      throw DomainError("read_quaternions: non-unit quaternion on line " + std::to_string(lineno));
    }
    out.push_back(Quaternion{q.a / n, q.b / n, q.c / n, q.d / n}.canonical());
  }
  return out;
}

}  // namespace sphreg
