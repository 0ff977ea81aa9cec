#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <vector>

#include "orbi/group.hpp"
#include "orbi/map_expr.hpp"
#include "orbi/matrix.hpp"

namespace orbi {

inline constexpr double kSliceSafety = 0.49;

/// Centered chart around u: x -> u + eps * x / sqrt(1 + |x|_G^2), equivariant
/// for the stabilizer of u. An infinite eps means the whole space is a
/// slice and the map is x -> u + x.
struct SliceChart {
  Eigen::VectorXd center;
  std::vector<std::size_t> stabilizer_indices;
  FiniteMatrixGroup stabilizer;
  double epsilon;
  MapExpr map;
};

/// R^n / G for a finite linear group G.
class LinearQuotient {
 public:
  explicit LinearQuotient(FiniteMatrixGroup group);

  const FiniteMatrixGroup& group() const noexcept { return group_; }
  std::size_t dim() const noexcept { return group_.dim(); }
  double tolerance() const noexcept { return group_.tolerance(); }
  const InvariantGram& gram() const noexcept { return gram_; }

  double norm(const Eigen::VectorXd& v) const;

  bool same_orbit(const Vector& u, const Vector& v) const;
  bool same_orbit(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  /// Index of some g with g u = v (within tolerance for real points).
  std::optional<std::size_t> element_between(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

  /// Lexicographically greatest orbit point.
  Vector canonical_rep(const Vector& u) const;
  /// Throws AmbiguousCanonical when two distinct orbit points first differ
  /// in a coordinate by no more than the tolerance.
  Eigen::VectorXd canonical_rep(const Eigen::VectorXd& u) const;
  /// Same choice without the ambiguity check; near-ties resolve by the
  /// remaining coordinates.
  Eigen::VectorXd canonical_rep_unchecked(const Eigen::VectorXd& u) const;

  /// safety * min over g outside the stabilizer of |g u - u|_G, or +inf
  /// when u is fixed by the whole group.
  double slice_radius(const Eigen::VectorXd& u, double safety = kSliceSafety) const;
  SliceChart slice_chart(const Eigen::VectorXd& u) const;

 private:
  FiniteMatrixGroup group_;
  InvariantGram gram_;
};

/// x^T gram x as an expression.
Expr quadratic_form(const Eigen::MatrixXd& gram);

}  // namespace orbi
