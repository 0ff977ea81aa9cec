#include "orbi/linalg.hpp"

#include <cmath>

namespace orbi {

namespace {

RowEchelon reduce_exact(Matrix m) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m(p, c).is_zero(0)) ++p;
    if (p == rows) continue;
    if (p != r) {
      for (std::size_t j = 0; j < cols; ++j) std::swap(m(p, j), m(r, j));
    }
    Scalar inv = Scalar(1) / m(r, c);
    for (std::size_t j = c; j < cols; ++j) m(r, j) *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m(i, c).is_zero(0)) continue;
      Scalar f = m(i, c);
      for (std::size_t j = c; j < cols; ++j) m(i, j) -= f * m(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return {std::move(m), std::move(pivots)};
}

RowEchelon reduce_approx(const Matrix& a, double tol, double scale) {
  Eigen::MatrixXd m = a.to_real();
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  const double threshold = tol * std::max(m.cwiseAbs().maxCoeff(), scale);
  std::vector<std::size_t> pivots;
  Eigen::Index r = 0;
  for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
    Eigen::Index p = r;
    double best = 0;
    for (Eigen::Index i = r; i < rows; ++i) {
      if (std::abs(m(i, c)) > best) {
        best = std::abs(m(i, c));
        p = i;
      }
    }
    if (best <= threshold || best == 0.0) {
      for (Eigen::Index i = r; i < rows; ++i) m(i, c) = 0;
      continue;
    }
    m.row(p).swap(m.row(r));
    m.row(r) /= m(r, c);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i != r) m.row(i) -= m(i, c) * m.row(r);
    }
    pivots.push_back(static_cast<std::size_t>(c));
    ++r;
  }
  return {Matrix::from_real(m), std::move(pivots)};
}

}  // namespace

RowEchelon row_reduce(const Matrix& a, double tol, double scale) {
  if (a.is_exact()) return reduce_exact(a);
  return reduce_approx(a, tol, scale);
}

std::size_t rank(const Matrix& a, double tol, double scale) { return row_reduce(a, tol, scale).pivots.size(); }

std::vector<Vector> kernel(const Matrix& a, double tol, double scale) {
  RowEchelon e = row_reduce(a, tol, scale);
  const bool exact = a.is_exact();
  std::vector<bool> is_pivot(a.cols(), false);
  for (auto c : e.pivots) is_pivot[c] = true;
  std::vector<Vector> basis;
  for (std::size_t free = 0; free < a.cols(); ++free) {
    if (is_pivot[free]) continue;
    std::vector<Scalar> v(a.cols(), exact ? Scalar(0) : Scalar::real(0));
    v[free] = exact ? Scalar(1) : Scalar::real(1);
    for (std::size_t k = 0; k < e.pivots.size(); ++k) v[e.pivots[k]] = -e.reduced(k, free);
    basis.emplace_back(std::move(v));
  }
  return basis;
}

Scalar determinant(const Matrix& a, double tol) {
  if (!a.is_square()) throw Error(ErrorCode::non_square, "determinant");
  if (!a.is_exact()) {
    double d = a.to_real().determinant();
    double scale = std::pow(std::max(a.max_abs(), 1e-300), static_cast<double>(a.rows()));
    return Scalar::real(std::abs(d) <= tol * scale ? 0.0 : d);
  }
  Matrix m = a;
  const std::size_t n = m.rows();
  Scalar det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m(p, c).is_zero(0)) ++p;
    if (p == n) return Scalar(0);
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(p, j), m(c, j));
      det = -det;
    }
    det *= m(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      if (m(i, c).is_zero(0)) continue;
      Scalar f = m(i, c) / m(c, c);
      for (std::size_t j = c; j < n; ++j) m(i, j) -= f * m(c, j);
    }
  }
  return det;
}

bool is_invertible(const Matrix& a, double tol) {
  if (!a.is_square()) return false;
  return rank(a, tol) == a.rows();
}

Matrix inverse(const Matrix& a, double tol) {
  if (!a.is_square()) throw Error(ErrorCode::non_square, "inverse");
  const std::size_t n = a.rows();
  Matrix aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
    aug(i, n + i) = a.is_exact() ? Scalar(1) : Scalar::real(1);
  }
  RowEchelon e = row_reduce(aug, tol);
  if (e.pivots.size() < n || e.pivots[n - 1] != n - 1) throw Error(ErrorCode::singular, "matrix is not invertible");
  Matrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) inv(i, j) = e.reduced(i, n + j);
  }
  return inv;
}

Subspace::Subspace(std::size_t ambient_dim, std::vector<Vector> basis)
    : ambient_dim_(ambient_dim), basis_(std::move(basis)) {
  for (const auto& v : basis_) {
    if (v.dim() != ambient_dim_) throw Error(ErrorCode::dim_mismatch, "subspace basis vector");
  }
  if (basis_.size() > ambient_dim_) throw Error(ErrorCode::invalid_argument, "basis larger than ambient dimension");
}

Subspace fixed_subspace(const Matrix& g, double tol) {
  if (!g.is_square()) throw Error(ErrorCode::non_square, "fixed_subspace needs a square matrix");
  Matrix shifted = g - (g.is_exact() ? Matrix::identity(g.rows()) : Matrix::identity(g.rows()).to_approx());
  // Rank threshold follows the magnitude of g, not of g - I, so a
  // near-identity approximate element still has a full fixed space.
  return Subspace(g.rows(), kernel(shifted, tol, g.max_abs()));
}

std::size_t codimension(const Subspace& s) { return s.ambient_dim() - s.rank(); }

Eigen::MatrixXd jacobian_fd(const RealMap& f, const Eigen::VectorXd& u, double step) {
  if (!(step > 0)) throw Error(ErrorCode::invalid_argument, "finite-difference step must be positive");
  Eigen::VectorXd probe = u;
  Eigen::MatrixXd jac;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    probe[j] = u[j] + step;
    Eigen::VectorXd plus = f(probe);
    probe[j] = u[j] - step;
    Eigen::VectorXd minus = f(probe);
    probe[j] = u[j];
    if (j == 0) jac.resize(plus.size(), u.size());
    jac.col(j) = (plus - minus) / (2 * step);
  }
  return jac;
}

}  // namespace orbi
