#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "orbi/counterexamples.hpp"
#include "orbi/lifting.hpp"

#include "oracles.hpp"

namespace orbi {
namespace {

constexpr double kPi = std::numbers::pi;

double at(const MapExpr& f, double t) {
  Eigen::VectorXd x(1);
  x << t;
  return f(x)[0];
}

Eigen::VectorXd pt(double x, double y) { return Eigen::Vector2d(x, y); }

// exp(-1/((t-a)(b-t))) on (a, b), normalized by its value at the midpoint.
double bump_oracle(int n, double t) {
  const double a = 1.0 / (n + 1);
  const double b = 1.0 / n;
  if (t <= a || t >= b) return 0;
  const double mid = 0.25 * (b - a) * (b - a);
  return std::exp(-1 / ((t - a) * (b - t)) + 1 / mid);
}

double midpoint(int n) { return 0.5 * (1.0 / n + 1.0 / (n + 1)); }

TEST(Bump, Examples) {
  // 0.5 is the left end of the support of bump(1); a smooth bump supported
  // in [1/2, 1] vanishes there. Its value is positive inside.
  EXPECT_EQ(at(bump(1), 0.5), 0);
  EXPECT_GT(at(bump(1), 0.5 + 0.01), 0);
  EXPECT_GT(at(bump(1), 0.75), 0);
  EXPECT_EQ(at(bump(2), 0.7), 0);
  EXPECT_GT(at(bump(3), 1 / kPi), 0);
}

TEST(Bump, MatchesClosedFormAndStaysInUnitRange) {
  for (int n = 1; n <= 6; ++n) {
    const MapExpr b = bump(n);
    EXPECT_NEAR(at(b, midpoint(n)), 1.0, 1e-12);
    for (int k = 0; k <= 50; ++k) {
      const double t = -0.1 + 1.3 * k / 50.0;
      const double v = at(b, t);
      EXPECT_NEAR(v, bump_oracle(n, t), 1e-12) << n << " " << t;
      EXPECT_GE(v, 0);
      EXPECT_LE(v, 1);
    }
  }
}

TEST(Example1, ZeroOutsideUnitInterval) {
  SignSequence eps{{-1, 1, -1}};
  MapExpr f = example1_map(eps);
  EXPECT_EQ(at(f, -1), 0);
  EXPECT_EQ(at(f, 2), 0);
  EXPECT_EQ(at(f, 0), 0);
}

TEST(Example1, SignFollowsSequence) {
  SignSequence eps{{1, -1, -1, 1, -1}};
  MapExpr f = example1_map(eps);
  for (int n = 1; n <= 5; ++n) {
    const double t = midpoint(n);
    const double v = at(f, t);
    EXPECT_EQ(v > 0 ? 1 : -1, eps[static_cast<std::size_t>(n)]) << n;
    EXPECT_NEAR(v, eps[static_cast<std::size_t>(n)] * std::exp(-1 / t) * bump_oracle(n, t), 1e-14) << n;
  }
  // Past the prefix the sign is +1.
  EXPECT_GT(at(f, midpoint(8)), 0);
}

// Sequences that differ at index n give lifts that are not related by a
// constant sign on (0, 1/n].
TEST(Example1, DifferentSignsAreInequivalentNearZero) {
  const SignSequence base{{1, -1, 1, 1, -1}};
  for (int n = 1; n <= 5; ++n) {
    SignSequence other = base;
    other.signs[static_cast<std::size_t>(n - 1)] *= -1;
    MapExpr fa = example1_map(base);
    MapExpr fb = example1_map(other);
    bool plus = true;
    bool minus = true;
    for (int k = n; k <= n + 6; ++k) {
      const double t = midpoint(k);
      const double a = at(fa, t);
      const double b = at(fb, t);
      ASSERT_NE(a, 0);
      plus = plus && std::abs(a - b) <= 1e-12 * std::abs(a);
      minus = minus && std::abs(a + b) <= 1e-12 * std::abs(a);
    }
    EXPECT_FALSE(plus) << n;
    EXPECT_FALSE(minus) << n;
  }
}

TEST(Example2, Values) {
  MapExpr f = example2_map();
  EXPECT_EQ(f(pt(3, 4)), pt(0, 0));
  EXPECT_EQ(f(pt(0, 0)), pt(0, 0));
  // Even n: on the positive x-axis ray; odd n: a positive multiple of x.
  const double r2 = midpoint(2);
  Eigen::VectorXd x2 = pt(0, r2);
  EXPECT_NEAR(f(x2)[1], 0, 1e-15);
  EXPECT_NEAR(f(x2)[0], std::exp(-r2) * bump_oracle(2, r2) * r2, 1e-14);
  const double r3 = midpoint(3);
  Eigen::VectorXd x3 = pt(r3 * std::cos(1.0), r3 * std::sin(1.0));
  EXPECT_LT((f(x3) - std::exp(-r3) * bump_oracle(3, r3) * x3).norm(), 1e-14);
}

TEST(Example2, AnnulusHomomorphismsAlternate) {
  FiniteMatrixGroup c4 = rotation_group(4);
  InducedOptions io;
  io.require_injective = false;
  MapExpr f = example2_map();
  for (int n = 1; n <= 6; ++n) {
    GroupHomomorphism h = induced_homomorphism(f, c4, c4, Region::annulus(2, 1.0 / (n + 1), 1.0 / n), io);
    if (oracle::example2_annulus_is_trivial(n)) {
      EXPECT_TRUE(h.is_trivial()) << n;
    } else {
      EXPECT_TRUE(h.is_identity_map()) << n;
    }
  }
}

TEST(HalfAngle, VanishesWhereProfileVanishes) {
  QuotientMap f = halfangle_map(default_halfangle_profile());
  EXPECT_LT(f(pt(0.2, 0.1)).norm(), 1e-300);
  EXPECT_LT(f(pt(0, 0)).norm(), 1e-300);
  EXPECT_LT(f(pt(1.1, 0)).norm(), 1e-300);
}

// theta and theta + 2 pi give opposite half angles, one orbit under +-I.
TEST(HalfAngle, WellDefinedOnTheQuotient) {
  QuotientMap f = halfangle_map(default_halfangle_profile());
  MapExpr g = default_halfangle_profile();
  for (int k = 0; k < 24; ++k) {
    const double r = 0.55 + 0.4 * k / 24.0;
    const double theta = -kPi + 2 * kPi * (k + 0.5) / 24.0;
    const double gr = at(g, r);
    Eigen::VectorXd a = gr * pt(std::cos(theta / 2), std::sin(theta / 2));
    Eigen::VectorXd b = gr * pt(std::cos((theta + 2 * kPi) / 2), std::sin((theta + 2 * kPi) / 2));
    Eigen::VectorXd image = f(pt(r * std::cos(theta), r * std::sin(theta)));
    EXPECT_TRUE(f.target().same_orbit(a, b));
    EXPECT_TRUE(f.target().same_orbit(image, a)) << k;
  }
}

TEST(HalfAngle, CoreLoopMonodromyIsMinusIdentity) {
  QuotientMap f = halfangle_map(default_halfangle_profile());
  auto loop = circle_loop(Eigen::VectorXd::Zero(2), 0.75, 64);
  std::size_t g = monodromy(f, loop, f(loop.front()));
  EXPECT_LT((f.target().group().real_element(g) - oracle::sqrt_monodromy_sign() * Eigen::Matrix2d::Identity()).norm(), 1e-12);
}

// The pieces are glued by flat factors: one-sided difference quotients agree
// at every r = 1/n.
TEST(Counterexamples, SmoothAcrossBranchBoundaries) {
  const double h = 1e-5;
  MapExpr f1 = example1_map(SignSequence{{1, -1, 1, -1, 1}});
  MapExpr f2 = example2_map();
  MapExpr hg = halfangle_expr(default_halfangle_profile());
  Eigen::VectorXd dir = pt(std::cos(0.3), std::sin(0.3));
  for (int n = 1; n <= 5; ++n) {
    const double r = 1.0 / n;
    const double right1 = (at(f1, r + h) - at(f1, r)) / h;
    const double left1 = (at(f1, r) - at(f1, r - h)) / h;
    EXPECT_LE(std::abs(right1 - left1), 1e-6) << n;

    Eigen::VectorXd c = r * dir;
    Eigen::VectorXd right2 = (f2(Eigen::VectorXd(c + h * dir)) - f2(c)) / h;
    Eigen::VectorXd left2 = (f2(c) - f2(Eigen::VectorXd(c - h * dir))) / h;
    EXPECT_LE((right2 - left2).norm(), 1e-6) << n;

    Eigen::VectorXd right3 = (hg(Eigen::VectorXd(c + h * dir)) - hg(c)) / h;
    Eigen::VectorXd left3 = (hg(c) - hg(Eigen::VectorXd(c - h * dir))) / h;
    EXPECT_LE((right3 - left3).norm(), 1e-6) << n;
  }
}

}  // namespace
}  // namespace orbi
