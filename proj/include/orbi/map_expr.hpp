#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "orbi/linalg.hpp"
#include "orbi/matrix.hpp"
#include "orbi/region.hpp"

namespace orbi {

/// Scalar expression over the coordinates x0..x(n-1) of the input point.
/// Immutable; copies share the tree.
class Expr {
 public:
  enum class Op {
    constant,
    coord,
    radius,
    neg,
    add,
    sub,
    mul,
    div,
    pow,
    sqrt,
    exp,
    log,
    sin,
    cos,
    atan2,
    abs,
    bump,
    ite,
    lt,
    le,
    gt,
    ge,
    eq,
    ne,
    logical_and,
    logical_or,
  };

  Expr(double value);  // NOLINT: numeric literals read naturally in builders
  static Expr constant(double value);
  static Expr coord(std::size_t index);
  /// Euclidean norm of the whole input point.
  static Expr radius();
  static Expr unary(Op op, Expr a);
  static Expr binary(Op op, Expr a, Expr b);
  /// Smooth bump supported on [1/(n+1), 1/n], scaled to peak 1 at the midpoint.
  static Expr bump(int n, Expr t);
  /// Lazy conditional: only the taken branch is evaluated.
  static Expr ite(Expr cond, Expr then_value, Expr else_value);

  Op op() const;
  double value() const;
  std::size_t index() const;
  int bump_index() const;
  const std::vector<Expr>& args() const;

  double eval(const Eigen::VectorXd& x) const;
  /// Largest coordinate index referenced, plus one.
  std::size_t arity() const;
  std::string to_string() const;

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr operator-(Expr a);
Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr pow(Expr a, Expr b);
Expr sqrt(Expr a);
Expr exp(Expr a);
Expr log(Expr a);
Expr sin(Expr a);
Expr cos(Expr a);
Expr atan2(Expr y, Expr x);
Expr abs(Expr a);
Expr operator<(Expr a, Expr b);
Expr operator<=(Expr a, Expr b);
Expr operator>(Expr a, Expr b);
Expr operator>=(Expr a, Expr b);
Expr operator&&(Expr a, Expr b);
Expr operator||(Expr a, Expr b);

/// Parses the syntax printed by Expr::to_string. Identifiers: x0.., x, y, z
/// (aliases for x0, x1, x2), r, pi. Functions: sqrt exp log sin cos abs
/// atan2(y,x) pow(a,b) bump(n,t) if(c,a,b).
Expr parse_expr(std::string_view text, std::string_view field = "expression");

/// A map R^in -> R^out given componentwise, defined on `domain`.
class MapExpr {
 public:
  MapExpr(std::size_t in_dim, std::vector<Expr> components, Region domain);
  MapExpr(std::size_t in_dim, std::vector<Expr> components);

  static MapExpr identity(std::size_t dim);
  static MapExpr identity(Region domain);
  static MapExpr linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);
  static MapExpr linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, Region domain);
  static MapExpr parse(std::size_t in_dim, const std::vector<std::string>& components, Region domain,
                       std::string_view field = "map");

  std::size_t in_dim() const noexcept { return in_dim_; }
  std::size_t out_dim() const noexcept { return components_.size(); }
  const std::vector<Expr>& components() const noexcept { return components_; }
  const Region& domain() const noexcept { return domain_; }

  /// Throws EvaluationError outside the domain or on an undefined value.
  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
  /// Same map, ignoring the domain (for probes straddling its boundary).
  Eigen::VectorXd eval_unrestricted(const Eigen::VectorXd& x) const;

  MapExpr with_domain(Region domain) const;
  /// this o inner.
  MapExpr compose(const MapExpr& inner) const;
  /// x -> a * this(x).
  MapExpr left_multiply(const Eigen::MatrixXd& a) const;

  RealMap as_function() const;
  std::vector<std::string> to_strings() const;

 private:
  std::size_t in_dim_;
  std::vector<Expr> components_;
  Region domain_;
};

Expr substitute(const Expr& e, const std::vector<Expr>& replacement);

Matrix jacobian_fd(const MapExpr& f, const Vector& u, double step = kDefaultFdStep);
Eigen::MatrixXd jacobian_fd(const MapExpr& f, const Eigen::VectorXd& u, double step = kDefaultFdStep);

}  // namespace orbi
