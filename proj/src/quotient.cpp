#include "orbi/quotient.hpp"

#include <cmath>

#include "orbi/error.hpp"

namespace orbi {

namespace {

void check_dim(const LinearQuotient& q, std::size_t n) {
  if (n != q.dim()) throw Error(ErrorCode::dim_mismatch, "point dimension differs from quotient dimension");
}

// Lexicographic comparison where coordinates within tol count as equal.
int lex_compare(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    double d = a[k] - b[k];
    if (d > tol) return 1;
    if (d < -tol) return -1;
  }
  return 0;
}

}  // namespace

LinearQuotient::LinearQuotient(FiniteMatrixGroup group) : group_(std::move(group)), gram_(invariant_gram(group_)) {}

double LinearQuotient::norm(const Eigen::VectorXd& v) const { return gamma_norm(gram_, v); }

bool LinearQuotient::same_orbit(const Vector& u, const Vector& v) const {
  check_dim(*this, u.dim());
  check_dim(*this, v.dim());
  if (group_.mode() == ScalarMode::approx || !u.is_exact() || !v.is_exact()) return same_orbit(u.to_real(), v.to_real());
  for (const auto& g : group_.elements()) {
    if (equal(g * u, v, 0)) return true;
  }
  return false;
}

bool LinearQuotient::same_orbit(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  return element_between(u, v).has_value();
}

std::optional<std::size_t> LinearQuotient::element_between(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  check_dim(*this, static_cast<std::size_t>(u.size()));
  check_dim(*this, static_cast<std::size_t>(v.size()));
  const double bound = tolerance() * std::max({1.0, u.norm(), v.norm()});
  for (std::size_t i = 0; i < group_.order(); ++i) {
    if ((group_.real_element(i) * u - v).norm() <= bound) return i;
  }
  return std::nullopt;
}

Vector LinearQuotient::canonical_rep(const Vector& u) const {
  check_dim(*this, u.dim());
  if (group_.mode() == ScalarMode::approx || !u.is_exact()) return Vector::from_real(canonical_rep(u.to_real()));
  Vector best = u;
  for (const auto& g : group_.elements()) {
    Vector p = g * u;
    for (std::size_t k = 0; k < p.dim(); ++k) {
      int c = compare(p[k], best[k], 0);
      if (c == 0) continue;
      if (c > 0) best = p;
      break;
    }
  }
  return best;
}

Eigen::VectorXd LinearQuotient::canonical_rep_unchecked(const Eigen::VectorXd& u) const {
  check_dim(*this, static_cast<std::size_t>(u.size()));
  const double tol = tolerance() * std::max(1.0, u.norm());
  Eigen::VectorXd best = u;
  for (std::size_t i = 1; i < group_.order(); ++i) {
    Eigen::VectorXd p = group_.real_element(i) * u;
    int c = lex_compare(p, best, tol);
    if (c == 0) c = lex_compare(p, best, 0);
    if (c > 0) best = p;
  }
  return best;
}

Eigen::VectorXd LinearQuotient::canonical_rep(const Eigen::VectorXd& u) const {
  Eigen::VectorXd best = canonical_rep_unchecked(u);
  const double tol = tolerance() * std::max(1.0, u.norm());
  for (const auto& p : orbit(group_, u, tolerance())) {
    if ((p - best).norm() <= tol) continue;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      double d = std::fabs(p[k] - best[k]);
      if (d == 0) continue;
      if (d <= tol) {
        throw Error(ErrorCode::ambiguous_canonical,
                    "orbit points " + Vector::from_real(p).to_string() + " and " + Vector::from_real(best).to_string() +
                        " straddle the tolerance");
      }
      break;
    }
  }
  return best;
}

double LinearQuotient::slice_radius(const Eigen::VectorXd& u, double safety) const {
  check_dim(*this, static_cast<std::size_t>(u.size()));
  if (!(safety > 0 && safety < 0.5)) throw Error(ErrorCode::invalid_argument, "slice safety factor must lie in (0, 0.5)");
  const double tol = tolerance() * std::max(1.0, u.norm());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < group_.order(); ++i) {
    Eigen::VectorXd d = group_.real_element(i) * u - u;
    if (d.norm() <= tol) continue;
    gap = std::min(gap, norm(d));
  }
  return std::isfinite(gap) ? safety * gap : gap;
}

Expr quadratic_form(const Eigen::MatrixXd& gram) {
  const auto n = static_cast<std::size_t>(gram.rows());
  std::optional<Expr> sum;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double c = i == j ? gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))
                        : gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +
                              gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
      if (c == 0) continue;
      Expr term = Expr::constant(c) * Expr::coord(i) * Expr::coord(j);
      sum = sum ? *sum + term : term;
    }
  }
  return sum ? *sum : Expr::constant(0);
}

SliceChart LinearQuotient::slice_chart(const Eigen::VectorXd& u) const {
  check_dim(*this, static_cast<std::size_t>(u.size()));
  std::vector<std::size_t> stab = stabilizer_indices(group_, u, tolerance());
  double eps = slice_radius(u);
  std::vector<Expr> comps;
  if (std::isfinite(eps)) {
    Expr scale = Expr::constant(eps) / sqrt(Expr::constant(1) + quadratic_form(gram_.real));
    for (std::size_t i = 0; i < dim(); ++i) comps.push_back(Expr::constant(u[static_cast<Eigen::Index>(i)]) + scale * Expr::coord(i));
  } else {
    for (std::size_t i = 0; i < dim(); ++i) comps.push_back(Expr::constant(u[static_cast<Eigen::Index>(i)]) + Expr::coord(i));
  }
  FiniteMatrixGroup sub = group_.subgroup(stab);
  return SliceChart{u, std::move(stab), std::move(sub), eps, MapExpr(dim(), std::move(comps))};
}

}  // namespace orbi
