#include <gtest/gtest.h>

#include <cmath>

#include "orbi/error.hpp"
#include "orbi/linalg.hpp"
#include "orbi/matrix.hpp"
#include "orbi/random.hpp"
#include "orbi/scalar.hpp"

#include "corpus.hpp"

namespace orbi {
namespace {

Matrix diag2(int a, int b) { return Matrix::from_rows({{a, 0}, {0, b}}); }

TEST(Scalar, ExactArithmeticStaysExact) {
  Scalar a = Scalar::rational(1, 3);
  Scalar b = Scalar::rational(1, 6);
  Scalar s = a + b;
  EXPECT_TRUE(s.is_exact());
  EXPECT_EQ(s, Scalar::rational(1, 2));
  EXPECT_EQ(s.to_string(), "1/2");
  EXPECT_EQ((a / b).to_string(), "2");
}

TEST(Scalar, MixedDegradesToApprox) {
  Scalar s = Scalar::rational(1, 2) + Scalar::real(0.25);
  EXPECT_FALSE(s.is_exact());
  EXPECT_DOUBLE_EQ(s.to_double(), 0.75);
  EXPECT_THROW(s.rational(), Error);
}

TEST(Scalar, ParseRespectsMode) {
  EXPECT_EQ(parse_scalar("-3/4", ScalarMode::exact), Scalar::rational(-3, 4));
  EXPECT_DOUBLE_EQ(parse_scalar("0.5", ScalarMode::approx).to_double(), 0.5);
  try {
    parse_scalar("0.5", ScalarMode::exact, "entry[1]");
    FAIL() << "decimal accepted in exact mode";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
    EXPECT_NE(std::string(e.what()).find("entry[1]"), std::string::npos);
  }
  EXPECT_THROW(parse_scalar("abc", ScalarMode::approx), Error);
}

TEST(Scalar, ApproxToStringRoundTrips) {
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    double v = rng.uniform(-1e3, 1e3);
    EXPECT_EQ(parse_scalar(Scalar::real(v).to_string(), ScalarMode::approx).to_double(), v);
  }
}

TEST(FixedSubspace, Examples) {
  Subspace full = fixed_subspace(Matrix::identity(2));
  EXPECT_EQ(full.rank(), 2U);
  Subspace axis = fixed_subspace(diag2(1, -1));
  ASSERT_EQ(axis.rank(), 1U);
  EXPECT_TRUE(equal(axis.basis()[0], Vector{1, 0}, 0) || equal(axis.basis()[0], Vector{-1, 0}, 0));
  EXPECT_EQ(fixed_subspace(diag2(-1, -1)).rank(), 0U);
}

TEST(FixedSubspace, NonSquareThrows) {
  try {
    fixed_subspace(Matrix(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_square);
  }
}

TEST(Codimension, Examples) {
  EXPECT_EQ(codimension(fixed_subspace(Matrix::identity(2))), 0U);
  EXPECT_EQ(codimension(fixed_subspace(diag2(1, -1))), 1U);
  EXPECT_EQ(codimension(Subspace(3, {})), 3U);
}

TEST(FixedSubspace, BasisFixedBitExactlyOnCorpus) {
  for (const auto& [name, g] : test::group_corpus()) {
    if (g.mode() != ScalarMode::exact) continue;
    for (const auto& m : g.elements()) {
      Subspace s = fixed_subspace(m);
      for (const auto& v : s.basis()) EXPECT_TRUE(equal(m * v, v, 0)) << name;
      EXPECT_EQ(codimension(s) + s.rank(), m.rows()) << name;
    }
  }
}

TEST(FixedSubspace, RankPlusCodimensionOnRandomRationals) {
  Rng rng(11);
  for (int k = 0; k < 50; ++k) {
    std::size_t n = 1 + rng.index(4);
    Matrix m = test::random_rational_matrix(n, rng);
    Subspace s = fixed_subspace(m);
    EXPECT_EQ(s.rank() + codimension(s), n);
    for (const auto& v : s.basis()) EXPECT_TRUE(equal(m * v, v, 0));
  }
}

TEST(LinearAlgebra, InverseAndDeterminant) {
  Matrix a = Matrix::from_rows({{1, 1}, {0, 1}});
  EXPECT_EQ(determinant(a), Scalar(1));
  EXPECT_TRUE(equal(inverse(a), Matrix::from_rows({{1, -1}, {0, 1}}), 0));
  Matrix singular = Matrix::from_rows({{1, 2}, {2, 4}});
  EXPECT_EQ(rank(singular), 1U);
  EXPECT_FALSE(is_invertible(singular));
  try {
    inverse(singular);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::singular);
  }
}

TEST(LinearAlgebra, ApproxRankIsScaleInvariant) {
  Matrix m = Matrix::from_rows({{Scalar::real(1e6), Scalar::real(2e6)}, {Scalar::real(2e6), Scalar::real(4e6 + 1e-6)}});
  EXPECT_EQ(rank(m), 1U);
  Matrix tiny = Matrix::from_rows({{Scalar::real(1e-12), Scalar::real(0)}, {Scalar::real(0), Scalar::real(2e-12)}});
  EXPECT_EQ(rank(tiny), 2U);
}

TEST(LinearAlgebra, KernelVectorsAreAnnihilated) {
  Rng rng(5);
  for (int k = 0; k < 30; ++k) {
    Matrix a = test::random_rational_matrix(3, rng);
    Matrix b(3, 3);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) b(i, j) = i == 2 ? a(0, j) + a(1, j) : a(i, j);
    }
    auto ker = kernel(b);
    EXPECT_EQ(ker.size() + rank(b), 3U);
    for (const auto& v : ker) EXPECT_TRUE((b * v).is_zero(0));
  }
}

TEST(JacobianFd, LinearIsExact) {
  Eigen::Matrix2d a;
  a << 2, -1, 0.5, 3;
  RealMap f = [a](const Eigen::VectorXd& x) { return Eigen::VectorXd(a * x); };
  Eigen::VectorXd u(2);
  u << 0.3, -7;
  EXPECT_LT((jacobian_fd(f, u) - a).norm(), 1e-9);
}

TEST(JacobianFd, SquareMap) {
  RealMap f = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(2);
    y << x[0] * x[0], x[1];
    return y;
  };
  Eigen::Matrix2d expected;
  expected << 2, 0, 0, 1;
  EXPECT_LT((jacobian_fd(f, Eigen::Vector2d(1, 0), 1e-5) - expected).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(JacobianFd, Rotation) {
  Eigen::Matrix2d r;
  r << 0, -1, 1, 0;
  RealMap f = [r](const Eigen::VectorXd& x) { return Eigen::VectorXd(r * x); };
  EXPECT_LT((jacobian_fd(f, Eigen::Vector2d(3, 4)) - r).norm(), 1e-9);
}

TEST(JacobianFd, QuadraticsWithinTenStepSquared) {
  Rng rng(21);
  const double step = 1e-3;
  for (int k = 0; k < 40; ++k) {
    Eigen::Matrix2d q1, q2;
    Eigen::Vector2d l;
    for (int i = 0; i < 4; ++i) {
      q1(i / 2, i % 2) = rng.uniform(-2, 2);
      q2(i / 2, i % 2) = rng.uniform(-2, 2);
    }
    l << rng.uniform(-2, 2), rng.uniform(-2, 2);
    RealMap f = [&](const Eigen::VectorXd& x) {
      Eigen::VectorXd y(2);
      y << x.dot(q1 * x) + l.dot(x), x.dot(q2 * x);
      return y;
    };
    Eigen::Vector2d u(rng.uniform(-1, 1), rng.uniform(-1, 1));
    Eigen::Matrix2d analytic;
    analytic.row(0) = ((q1 + q1.transpose()) * u + l).transpose();
    analytic.row(1) = ((q2 + q2.transpose()) * u).transpose();
    EXPECT_LE((jacobian_fd(f, u, step) - analytic).cwiseAbs().maxCoeff(), 10 * step * step);
  }
}

}  // namespace
}  // namespace orbi
