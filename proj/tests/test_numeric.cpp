#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sphreg/activations.hpp"
#include "sphreg/numeric.hpp"

using namespace sphreg;

TEST(Dot, OrthogonalAndParallel) {
  EXPECT_EQ(dot(Vector{1, 0}, Vector{0, 1}), 0.0);
  EXPECT_EQ(dot(Vector{1, 1}, Vector{1, 1}), 2.0);
}

TEST(Dot, MatchesSummationLoop) {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const Vector a = rng.normal_vector(5), b = rng.normal_vector(5);
    EXPECT_NEAR(dot(a, b), oracle::dot(a.values(), b.values()), 1e-14);
  }
}

TEST(Dot, SymmetricAndBilinear) {
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    const Vector a = rng.normal_vector(7), b = rng.normal_vector(7), c = rng.normal_vector(7);
    const double s = rng.normal();
    EXPECT_DOUBLE_EQ(dot(a, b), dot(b, a));
    EXPECT_NEAR(dot(s * a + c, b), s * dot(a, b) + dot(c, b), 1e-12);
  }
}

TEST(Dot, LengthMismatchThrows) {
  EXPECT_THROW(dot(Vector{1, 2}, Vector{1, 2, 3}), DimensionError);
}

TEST(Outer, BasisExample) {
  const Matrix m = outer(Vector{1, 0}, Vector{0, 1});
  EXPECT_EQ(m, (Matrix{{0, 1}, {0, 0}}));
}

TEST(Outer, UnitVectorHasTraceOne) {
  Rng rng(13);
  for (int t = 0; t < 20; ++t) {
    const Vector a = l2_normalize(rng.normal_vector(6));
    EXPECT_NEAR(outer(a, a).trace(), 1.0, 1e-14);
  }
}

TEST(Outer, MatchesElementLoop) {
  Rng rng(14);
  const Vector a = rng.normal_vector(4), b = rng.normal_vector(3);
  const Matrix m = outer(a, b);
  const auto ref = oracle::outer(a.values(), b.values());
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(m(i, j), ref[i][j]);
}

TEST(L2Normalize, ThreeFourFive) {
  const Vector v = l2_normalize(Vector{3, 4});
  EXPECT_NEAR(v[0], 0.6, 1e-15);
  EXPECT_NEAR(v[1], 0.8, 1e-15);
}

TEST(L2Normalize, ZeroVectorIsDegenerate) {
  EXPECT_THROW(l2_normalize(Vector{0, 0}), DegenerateError);
}

TEST(L2Normalize, UnitNormAndIdempotent) {
  Rng rng(15);
  for (int t = 0; t < 1000; ++t) {
    const Vector v = rng.normal_vector(1 + rng.uniform_index(16), rng.uniform(1e-3, 1e3));
    const Vector u = l2_normalize(v);
    EXPECT_NEAR(oracle::dot(u.values(), u.values()), 1.0, 1e-12);
    EXPECT_LE(max_abs_diff(l2_normalize(u), u), 1e-12);
  }
}

TEST(FdJacobian, IdentityMap) {
  const Vector x{0.3, -1.2, 2.0};
  const Matrix j = fd_jacobian([](const Vector& v) { return v; }, x);
  EXPECT_LE(max_abs_diff(j, Matrix::identity(3)), 1e-9);
}

TEST(FdJacobian, Square) {
  const Matrix j = fd_jacobian([](const Vector& v) { return Vector{v[0] * v[0]}; }, Vector{3}, 1e-5);
  EXPECT_NEAR(j(0, 0), 6.0, 1e-8);
}

TEST(FdJacobian, SoftmaxAtOrigin) {
  const Matrix j = fd_jacobian(softmax_forward, Vector{0, 0});
  EXPECT_LE(max_abs_diff(j, Matrix{{0.25, -0.25}, {-0.25, 0.25}}), 1e-9);
}

TEST(FdJacobian, LinearMapExact) {
  Rng rng(16);
  Matrix a(4, 5);
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  const Matrix j = fd_jacobian([&a](const Vector& v) { return a * v; }, rng.normal_vector(5), 1e-5);
  EXPECT_LE(max_abs_diff(j, a), 1e-8);
}

TEST(FdJacobian, NonFiniteEvaluationThrows) {
  auto f = [](const Vector& v) { return Vector{std::log(v[0])}; };
  EXPECT_THROW(fd_jacobian(f, Vector{0.0}), NonFiniteError);
  EXPECT_THROW(fd_jacobian(f, Vector{1.0}, 0.0), DomainError);
}

TEST(FdGradient, Quadratic) {
  const Vector g = fd_gradient([](const Vector& v) { return v[0] * v[0] + 3 * v[1]; }, Vector{2, 5});
  EXPECT_NEAR(g[0], 4.0, 1e-8);
  EXPECT_NEAR(g[1], 3.0, 1e-8);
}

TEST(RelativeError, FloorAppliesNearZero) {
  EXPECT_NEAR(relative_error(1.0, 1.1), 0.1 / 1.1, 1e-15);
  EXPECT_DOUBLE_EQ(relative_error(0.0, 1e-9), 1e-9 / kRelErrorFloor);
}

TEST(Matrix, ProductsAndTranspose) {
  const Matrix a{{1, 2}, {3, 4}, {5, 6}};
  const Matrix b{{1, 0, 2}, {0, 1, 1}};
  EXPECT_EQ(a * b, (Matrix{{1, 2, 4}, {3, 4, 10}, {5, 6, 16}}));
  EXPECT_EQ(a.transpose(), (Matrix{{1, 3, 5}, {2, 4, 6}}));
  const Vector v{1, -1};
  EXPECT_EQ(a * v, (Vector{-1, -1, -1}));
  EXPECT_EQ(transpose_times(a, Vector{1, 0, 1}), (Vector{6, 8}));
  EXPECT_THROW(a * a, DimensionError);
}

TEST(Rng, EqualSeedsGiveEqualStreams) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs = differs || x != c.next_u64();
  }
  EXPECT_TRUE(differs);
  Rng d(7), e(7);
  for (int i = 0; i < 101; ++i) EXPECT_EQ(d.normal(), e.normal());
}

TEST(Rng, UniformRangeAndMoments) {
  Rng rng(5);
  double sum = 0.0, sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Rng, UniformIndexAndPermutation) {
  Rng rng(6);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) counts[rng.uniform_index(5)]++;
  for (int c : counts) EXPECT_NEAR(c / 50000.0, 0.2, 0.01);
  EXPECT_THROW(rng.uniform_index(0), DomainError);

  auto p = rng.permutation(100);
  std::sort(p.begin(), p.end());
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(p[i], i);
}

TEST(Rng, ForksAreIndependentAndStable) {
  const Rng root(99);
  Rng a = root.fork(1), b = root.fork(2), a2 = root.fork(1);
  EXPECT_NE(a.seed(), b.seed());
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u64(), a2.next_u64());
}
