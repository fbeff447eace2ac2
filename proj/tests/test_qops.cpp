#include "photodet/qops.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace photodet;
using testutil::kron;
using testutil::max_abs;

namespace {

Matrix sigma_x() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return m;
}

}  // namespace

TEST(Embed, SingleSubsystemIsIdentityMap) {
  const SpaceLayout layout({{"q", 2}});
  EXPECT_EQ(max_abs(embed(sigma_x(), "q", layout).matrix() - sigma_x()), 0.0);
}

TEST(Embed, IdentityStaysIdentity) {
  const SpaceLayout layout({{"a", 2}, {"b", 3}});
  const Matrix id3 = Matrix::Identity(3, 3);
  EXPECT_EQ(max_abs(embed(id3, "b", layout).matrix() - Matrix::Identity(6, 6)), 0.0);
}

TEST(Embed, KetBraOnSecondFactor) {
  const SpaceLayout layout({{"a", 2}, {"b", 2}});
  const Matrix m = embed(ket_bra(0, 1, 2), "b", layout).matrix();
  Matrix expected = Matrix::Zero(4, 4);
  expected(0, 1) = 1.0;
  expected(2, 3) = 1.0;
  EXPECT_EQ(max_abs(m - expected), 0.0);
}

TEST(Embed, MatchesKroneckerProduct) {
  std::mt19937_64 rng(7);
  const SpaceLayout layout({{"a", 2}, {"b", 3}, {"c", 2}});
  const Matrix op = testutil::random_matrix(3, rng);
  const Matrix expected = kron(kron(Matrix::Identity(2, 2), op), Matrix::Identity(2, 2));
  EXPECT_LT(max_abs(embed(op, "b", layout).matrix() - expected), 1e-15);
}

TEST(Embed, LiftsMultiSubsystemOperatorInAnyOrder) {
  std::mt19937_64 rng(11);
  const Matrix x = testutil::random_matrix(2, rng);
  const Matrix y = testutil::random_matrix(3, rng);
  // Sub-layout lists c before a; target is [a, b, c].
  const SpaceLayout sub({{"c", 3}, {"a", 2}});
  const Operator op(sub, kron(y, x));
  const SpaceLayout full({{"a", 2}, {"b", 2}, {"c", 3}});
  const Matrix expected = kron(kron(x, Matrix::Identity(2, 2)), y);
  EXPECT_LT(max_abs(embed(op, full).matrix() - expected), 1e-14);
}

TEST(Embed, Errors) {
  const SpaceLayout layout({{"a", 2}});
  EXPECT_THROW(embed(sigma_x(), "missing", layout), std::invalid_argument);
  EXPECT_THROW(embed(Matrix::Identity(3, 3), "a", layout), std::invalid_argument);
  EXPECT_THROW(SpaceLayout({{"a", 2}, {"a", 3}}), std::invalid_argument);
}

TEST(Dissipator, ZeroOperator) {
  std::mt19937_64 rng(1);
  const Matrix rho = testutil::random_density(3, rng);
  EXPECT_EQ(max_abs(dissipator(Matrix::Zero(3, 3), rho)), 0.0);
}

TEST(Dissipator, DecayOfExcitedState) {
  const double gamma = 0.7;
  const Matrix c = std::sqrt(gamma) * ket_bra(0, 1, 2);
  const Matrix out = dissipator(c, ket_bra(1, 1, 2));
  const Matrix expected = gamma * (ket_bra(0, 0, 2) - ket_bra(1, 1, 2));
  EXPECT_LT(max_abs(out - expected), 1e-15);
}

TEST(Superoperators, TracelessAndHermitianOnRandomInputs) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 100; ++i) {
    const int dim = 2 + i % 5;
    const Matrix rho = testutil::random_density(dim, rng);
    const Matrix c1 = testutil::random_matrix(dim, rng);
    const Matrix c2 = testutil::random_matrix(dim, rng);
    const Matrix d = dissipator(c1, rho);
    const Matrix s = coupling_super(c1, c2, rho);
    const Matrix m = measurement_super(c1, 0.3 * i, rho);
    EXPECT_LT(std::abs(d.trace()), 1e-10);
    EXPECT_LT(std::abs(s.trace()), 1e-10);
    EXPECT_LT(std::abs(m.trace()), 1e-10);
    EXPECT_LT(max_abs(d - d.adjoint()), 1e-10);
    EXPECT_LT(max_abs(s - s.adjoint()), 1e-10);
    EXPECT_LT(max_abs(m - m.adjoint()), 1e-10);
  }
}

TEST(CouplingSuper, ZeroOperators) {
  std::mt19937_64 rng(3);
  const Matrix rho = testutil::random_density(4, rng);
  EXPECT_EQ(max_abs(coupling_super(Matrix::Zero(4, 4), Matrix::Zero(4, 4), rho)), 0.0);
}

TEST(CouplingSuper, EqualArgumentsGiveTwiceTheDissipator) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const Matrix rho = testutil::random_density(4, rng);
    const Matrix c = testutil::random_matrix(4, rng);
    EXPECT_LT(max_abs(coupling_super(c, c, rho) - 2.0 * dissipator(c, rho)), 1e-12);
  }
}

TEST(MeasurementSuper, ZeroOperator) {
  std::mt19937_64 rng(9);
  const Matrix rho = testutil::random_density(3, rng);
  EXPECT_EQ(max_abs(measurement_super(Matrix::Zero(3, 3), 0.4, rho)), 0.0);
}

TEST(MeasurementSuper, VanishesOnGroundState) {
  const Matrix out = measurement_super(ket_bra(0, 1, 2), 0.9, ket_bra(0, 0, 2));
  EXPECT_EQ(max_abs(out), 0.0);
}

TEST(Expectation, Examples) {
  std::mt19937_64 rng(4);
  const Matrix rho = testutil::random_density(3, rng);
  EXPECT_NEAR(std::abs(expectation(Matrix::Identity(3, 3), rho) - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(expectation(ket_bra(1, 1, 2), ket_bra(1, 1, 2)).real(), 1.0, 1e-15);
  Matrix plus = Matrix::Constant(2, 2, 0.5);
  const Complex v = expectation(sigma_x(), plus);
  EXPECT_NEAR(v.real(), 1.0, 1e-15);
  EXPECT_NEAR(v.imag(), 0.0, 1e-15);
}

TEST(Expectation, RealForHermitianObservables) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const Matrix a = testutil::random_matrix(4, rng);
    const Matrix h = a + a.adjoint();
    EXPECT_LT(std::abs(expectation(h, testutil::random_density(4, rng)).imag()), 1e-10);
  }
}

TEST(Shapes, MismatchThrows) {
  EXPECT_THROW(dissipator(Matrix::Zero(2, 2), Matrix::Zero(3, 3)), std::invalid_argument);
  EXPECT_THROW(coupling_super(Matrix::Zero(2, 2), Matrix::Zero(3, 3), Matrix::Zero(2, 2)), std::invalid_argument);
  EXPECT_THROW(measurement_super(Matrix::Zero(2, 2), 0.0, Matrix::Zero(3, 3)), std::invalid_argument);
  EXPECT_THROW(expectation(Matrix::Zero(2, 2), Matrix::Zero(3, 3)), std::invalid_argument);
}

TEST(DensityMatrix, Validation) {
  const SpaceLayout layout({{"q", 2}});
  Matrix bad_trace = Matrix::Identity(2, 2);
  EXPECT_THROW(DensityMatrix(layout, bad_trace), std::invalid_argument);
  Matrix not_hermitian = 0.5 * Matrix::Identity(2, 2);
  not_hermitian(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix(layout, not_hermitian), std::invalid_argument);
  const DensityMatrix ok = DensityMatrix::basis(SpaceLayout({{"a", 2}, {"b", 3}}), {1, 2});
  EXPECT_DOUBLE_EQ(ok.population({1, 2}), 1.0);
  EXPECT_GE(ok.min_eigenvalue(), -1e-12);
}

TEST(TraceDistance, Basics) {
  EXPECT_NEAR(trace_distance(ket_bra(0, 0, 2), ket_bra(1, 1, 2)), 1.0, 1e-14);
  std::mt19937_64 rng(6);
  const Matrix rho = testutil::random_density(3, rng);
  EXPECT_NEAR(trace_distance(rho, rho), 0.0, 1e-14);
}
