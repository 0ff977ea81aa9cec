#include <gtest/gtest.h>

#include <cmath>

#include "orbi/counterexamples.hpp"
#include "orbi/error.hpp"
#include "orbi/quotient.hpp"
#include "orbi/region.hpp"

#include "corpus.hpp"
#include "oracles.hpp"

namespace orbi {
namespace {

Eigen::VectorXd pt(double x, double y) { return Eigen::Vector2d(x, y); }

Eigen::VectorXd random_point(std::size_t n, Rng& rng, double scale = 2.0) {
  Eigen::VectorXd v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.uniform(-scale, scale);
  return v;
}

TEST(SameOrbit, Examples) {
  LinearQuotient pm(sign_group(2));
  EXPECT_TRUE(pm.same_orbit(Vector{1, 2}, Vector{1, 2}));
  EXPECT_TRUE(pm.same_orbit(Vector{1, 2}, Vector{-1, -2}));
  LinearQuotient c4(rotation_group(4));
  EXPECT_FALSE(c4.same_orbit(Vector{1, 0}, Vector{1, 1}));
  EXPECT_TRUE(c4.same_orbit(pt(1, 0), pt(0, -1)));
  EXPECT_THROW(c4.same_orbit(Vector{1, 0}, Vector{1, 0, 0}), Error);
}

TEST(CanonicalRep, Examples) {
  LinearQuotient pm(sign_group(2));
  EXPECT_TRUE(equal(pm.canonical_rep(Vector{0, 0}), Vector{0, 0}, 0));
  EXPECT_TRUE(equal(pm.canonical_rep(Vector{-1, 5}), Vector{1, -5}, 0));
  LinearQuotient c4(rotation_group(4));
  EXPECT_TRUE(equal(c4.canonical_rep(Vector{0, 1}), Vector{1, 0}, 0));
}

TEST(CanonicalRep, AmbiguousWhenOrbitStraddlesTolerance) {
  LinearQuotient pm(sign_group(2));
  try {
    pm.canonical_rep(pt(1e-12, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ambiguous_canonical);
  }
  EXPECT_NO_THROW(pm.canonical_rep_unchecked(pt(1e-12, 1)));
}

TEST(CanonicalRep, IdempotentAndOrbitInvariantOnCorpus) {
  Rng rng(9);
  for (const auto& [name, g] : test::group_corpus()) {
    LinearQuotient q(g);
    for (int k = 0; k < 30; ++k) {
      Eigen::VectorXd u = random_point(g.dim(), rng);
      Eigen::VectorXd c = q.canonical_rep_unchecked(u);
      EXPECT_LT((q.canonical_rep_unchecked(c) - c).norm(), 1e-9) << name;
      for (std::size_t i = 0; i < g.order(); ++i) {
        EXPECT_LT((q.canonical_rep_unchecked(Eigen::VectorXd(g.real_element(i) * u)) - c).norm(), 1e-9) << name;
      }
    }
  }
}

TEST(SliceRadius, Examples) {
  LinearQuotient pm(sign_group(2));
  EXPECT_TRUE(std::isinf(pm.slice_radius(pt(0, 0))));
  EXPECT_NEAR(pm.slice_radius(pt(1, 0), 0.49), 0.49 * std::sqrt(8.0), 1e-12);

  LinearQuotient c4(rotation_group(4));
  double brute = INFINITY;
  for (std::size_t i = 1; i < 4; ++i) brute = std::min(brute, c4.norm(c4.group().real_element(i) * pt(1, 0) - pt(1, 0)));
  EXPECT_NEAR(c4.slice_radius(pt(1, 0), 0.49), 0.49 * brute, 1e-12);
}

TEST(SliceChart, Examples) {
  LinearQuotient pm(sign_group(2));
  SliceChart s = pm.slice_chart(pt(1, 0));
  EXPECT_LT((s.map(pt(0, 0)) - pt(1, 0)).norm(), 1e-15);
  EXPECT_EQ(s.stabilizer.order(), 1U);
  Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd x = random_point(2, rng, 50);
    EXPECT_LT(pm.norm(s.map(x) - pt(1, 0)), s.epsilon);
  }

  LinearQuotient d4(dihedral4());
  SliceChart m = d4.slice_chart(pt(1, 0));
  ASSERT_EQ(m.stabilizer.order(), 2U);
  Eigen::Matrix2d flip;
  flip << 1, 0, 0, -1;
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd x = random_point(2, rng, 5);
    EXPECT_LT((m.map(Eigen::VectorXd(flip * x)) - flip * m.map(x)).norm(), 1e-9);
  }
}

TEST(SliceChart, CenteredOnCorpus) {
  Rng rng(12);
  for (const auto& [name, g] : test::group_corpus()) {
    LinearQuotient q(g);
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd u = random_point(g.dim(), rng);
      SliceChart s = q.slice_chart(u);
      EXPECT_LT((s.map(Eigen::VectorXd::Zero(g.dim())) - u).norm(), 1e-12) << name;
    }
  }
}

// For g outside the stabilizer the balls around u and g u are disjoint.
TEST(SliceChart, BallDisjointness) {
  Rng rng(31);
  for (const auto& [name, g] : test::group_corpus()) {
    LinearQuotient q(g);
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd u = random_point(g.dim(), rng);
      const double eps = q.slice_radius(u);
      auto stab = stabilizer_indices(g, u, 1e-9);
      for (std::size_t i = 0; i < g.order(); ++i) {
        if (std::find(stab.begin(), stab.end(), i) != stab.end()) continue;
        EXPECT_GT(q.norm(g.real_element(i) * u - u), 2 * eps) << name;
      }
    }
  }
}

// x, y in B(u, eps) on one G-orbit are already on one G_u-orbit.
TEST(SliceChart, Injectivity) {
  Rng rng(41);
  for (const auto& [name, g] : test::group_corpus()) {
    LinearQuotient q(g);
    for (int k = 0; k < 6; ++k) {
      // The origin and averages over <g> have nontrivial stabilizers.
      Eigen::VectorXd u = k % 2 == 0 ? random_point(g.dim(), rng) : Eigen::VectorXd::Zero(g.dim());
      if (k == 3 && g.order() > 1) {
        const std::size_t e = g.order() - 1;
        Eigen::VectorXd v = random_point(g.dim(), rng);
        u = v;
        std::size_t p = e;
        while (p != 0) {
          u += g.real_element(p) * v;
          p = g.multiply(p, e);
        }
      }
      SliceChart s = q.slice_chart(u);
      LinearQuotient local(s.stabilizer);
      std::vector<Eigen::VectorXd> inside;
      for (int j = 0; j < 40; ++j) inside.push_back(s.map(random_point(g.dim(), rng, 3)));
      for (std::size_t j = 0; j < inside.size(); ++j) {
        Eigen::VectorXd x = inside[j];
        for (std::size_t e = 0; e < g.order(); ++e) {
          Eigen::VectorXd y = g.real_element(e) * x;
          if (q.norm(y - u) >= s.epsilon) continue;
          EXPECT_TRUE(local.same_orbit(Eigen::VectorXd(x - u), Eigen::VectorXd(y - u))) << name;
        }
      }
    }
  }
}

TEST(LinearQuotient, ElementBetween) {
  LinearQuotient c4(rotation_group(4));
  auto g = c4.element_between(pt(1, 0), pt(0, 1));
  ASSERT_TRUE(g.has_value());
  EXPECT_LT((c4.group().real_element(*g) * pt(1, 0) - pt(0, 1)).norm(), 1e-12);
  EXPECT_FALSE(c4.element_between(pt(1, 0), pt(1, 1)).has_value());
}

}  // namespace
}  // namespace orbi
