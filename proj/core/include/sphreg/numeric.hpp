#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sphreg {

// Error hierarchy shared by every module.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input violates a documented precondition (off-sphere, wrong sign, bad index).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Input sits on a singular point of the map (zero vector, gimbal lock).
class DegenerateError : public DomainError {
 public:
  using DomainError::DomainError;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Dense vector of doubles. An empty vector is allowed only as a "no value"
/// marker (e.g. a missing gradient); every numeric op rejects it.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  [[nodiscard]] double* data() noexcept { return data_.data(); }
  [[nodiscard]] const double* data() const noexcept { return data_.data(); }
  [[nodiscard]] std::span<double> span() noexcept { return data_; }
  [[nodiscard]] std::span<const double> span() const noexcept { return data_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  [[nodiscard]] double norm() const noexcept;
  [[nodiscard]] bool all_finite() const noexcept;

  Vector& operator+=(const Vector& rhs);
  Vector& operator-=(const Vector& rhs);
  Vector& operator*=(double s) noexcept;

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

Vector operator+(Vector lhs, const Vector& rhs);
Vector operator-(Vector lhs, const Vector& rhs);
Vector operator*(double s, Vector v);

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(const Vector& d);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  [[nodiscard]] std::span<double> row(std::size_t r) noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  [[nodiscard]] double* data() noexcept { return data_.data(); }
  [[nodiscard]] const double* data() const noexcept { return data_.data(); }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return data_; }

  [[nodiscard]] Matrix transpose() const;
  [[nodiscard]] double trace() const;
  [[nodiscard]] double frobenius_norm() const noexcept;
  [[nodiscard]] bool all_finite() const noexcept;

  Matrix& operator+=(const Matrix& rhs);
  Matrix& operator-=(const Matrix& rhs);
  Matrix& operator*=(double s) noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix lhs, const Matrix& rhs);
Matrix operator*(double s, Matrix m);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& m, const Vector& v);

/// mᵀ·v without materializing the transpose.
Vector transpose_times(const Matrix& m, const Vector& v);

/// Largest absolute elementwise difference; shapes must agree.
double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs_diff(const Vector& a, const Vector& b);

double dot(const Vector& a, const Vector& b);
Matrix outer(const Vector& a, const Vector& b);

/// v / ‖v‖. Throws DegenerateError for a zero (or non-finite norm) vector.
Vector l2_normalize(const Vector& v);

using VectorMap = std::function<Vector(const Vector&)>;

inline constexpr double kDefaultFdEps = 1e-5;

/// Central-difference Jacobian, J(j, i) = ∂f_j/∂x_i.
Matrix fd_jacobian(const VectorMap& f, const Vector& x, double eps = kDefaultFdEps);

/// Central-difference gradient of a scalar function.
Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                   double eps = kDefaultFdEps);

/// Relative error between an analytic and a reference value:
/// |a - b| / max(|a|, |b|, floor). The floor keeps entries that are
/// analytically ~0 from dividing finite-difference noise by ~0.
inline constexpr double kRelErrorFloor = 1e-3;
double relative_error(double analytic, double reference, double floor = kRelErrorFloor);
double max_relative_error(const Matrix& analytic, const Matrix& reference,
                          double floor = kRelErrorFloor);
double max_relative_error(const Vector& analytic, const Vector& reference,
                          double floor = kRelErrorFloor);

/// Counter-based generator (SplitMix64 finalizer over a Weyl sequence).
/// Produces the same stream on every platform for a given seed; normals and
/// integer draws are computed here rather than through <random> distributions,
/// whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : seed_(seed) {}

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1).
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  Vector normal_vector(std::size_t n, double stddev = 1.0);
  std::vector<std::size_t> permutation(std::size_t n);

  /// Independent child stream; derived deterministically from this stream's seed.
  [[nodiscard]] Rng fork(std::uint64_t stream) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace sphreg
