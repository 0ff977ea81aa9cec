#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <vector>

#include "orbi/error.hpp"
#include "orbi/matrix.hpp"

namespace orbi {

/// Reduced row echelon form with the pivot columns that produced it.
struct RowEchelon {
  Matrix reduced;
  std::vector<std::size_t> pivots;
};

/// Gauss-Jordan elimination. Exact matrices are reduced exactly; anything
/// else runs in double with partial pivoting, treating entries with
/// |x| <= tol * max(scale, max|a_ij|) as zero. Pass `scale` when `a` was
/// derived from a larger matrix (e.g. g - I) whose magnitude sets the rank
/// threshold.
RowEchelon row_reduce(const Matrix& a, double tol = kDefaultTolerance, double scale = 0.0);

std::size_t rank(const Matrix& a, double tol = kDefaultTolerance, double scale = 0.0);

/// Basis of {x : a x = 0}, one vector per free column.
std::vector<Vector> kernel(const Matrix& a, double tol = kDefaultTolerance, double scale = 0.0);

Scalar determinant(const Matrix& a, double tol = kDefaultTolerance);

/// Throws Singular when the matrix has no inverse under the active mode.
Matrix inverse(const Matrix& a, double tol = kDefaultTolerance);

bool is_invertible(const Matrix& a, double tol = kDefaultTolerance);

class Subspace {
 public:
  Subspace(std::size_t ambient_dim, std::vector<Vector> basis);

  std::size_t ambient_dim() const noexcept { return ambient_dim_; }
  std::size_t rank() const noexcept { return basis_.size(); }
  const std::vector<Vector>& basis() const noexcept { return basis_; }

 private:
  std::size_t ambient_dim_;
  std::vector<Vector> basis_;
};

/// ker(g - I): the vectors fixed by g.
Subspace fixed_subspace(const Matrix& g, double tol = kDefaultTolerance);

std::size_t codimension(const Subspace& s);

inline constexpr double kDefaultFdStep = 1e-5;

using RealMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Central-difference Jacobian of f at u.
Eigen::MatrixXd jacobian_fd(const RealMap& f, const Eigen::VectorXd& u, double step = kDefaultFdStep);

}  // namespace orbi
