#include "orbi/map_expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "orbi/error.hpp"

namespace orbi {

struct Expr::Node {
  Op op = Op::constant;
  double value = 0;
  std::size_t index = 0;
  int bump = 0;
  std::vector<Expr> args;
};

namespace {

[[noreturn]] void eval_fail(const std::string& what) { throw Error(ErrorCode::evaluation_error, what); }

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* function_name(Expr::Op op) {
  switch (op) {
    case Expr::Op::sqrt: return "sqrt";
    case Expr::Op::exp: return "exp";
    case Expr::Op::log: return "log";
    case Expr::Op::sin: return "sin";
    case Expr::Op::cos: return "cos";
    case Expr::Op::abs: return "abs";
    case Expr::Op::atan2: return "atan2";
    case Expr::Op::pow: return "pow";
    default: return nullptr;
  }
}

const char* infix_symbol(Expr::Op op) {
  switch (op) {
    case Expr::Op::add: return " + ";
    case Expr::Op::sub: return " - ";
    case Expr::Op::mul: return " * ";
    case Expr::Op::div: return " / ";
    case Expr::Op::lt: return " < ";
    case Expr::Op::le: return " <= ";
    case Expr::Op::gt: return " > ";
    case Expr::Op::ge: return " >= ";
    case Expr::Op::eq: return " == ";
    case Expr::Op::ne: return " != ";
    case Expr::Op::logical_and: return " && ";
    case Expr::Op::logical_or: return " || ";
    default: return nullptr;
  }
}

double bump_value(int n, double t) {
  const double a = 1.0 / (n + 1);
  const double b = 1.0 / n;
  if (!(t > a && t < b)) return 0.0;
  // Peak-normalized in log space: exp(4/(b-a)^2 - 1/((t-a)(b-t))) <= 1.
  const double w = b - a;
  return std::exp(4.0 / (w * w) - 1.0 / ((t - a) * (b - t)));
}

}  // namespace

Expr::Expr(double value) : Expr(constant(value)) {}

Expr Expr::constant(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::invalid_argument, "non-finite constant");
  auto n = std::make_shared<Node>();
  n->op = Op::constant;
  n->value = value;
  return Expr(n);
}

Expr Expr::coord(std::size_t index) {
  auto n = std::make_shared<Node>();
  n->op = Op::coord;
  n->index = index;
  return Expr(n);
}

Expr Expr::radius() {
  auto n = std::make_shared<Node>();
  n->op = Op::radius;
  return Expr(n);
}

Expr Expr::unary(Op op, Expr a) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = {std::move(a)};
  return Expr(n);
}

Expr Expr::binary(Op op, Expr a, Expr b) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = {std::move(a), std::move(b)};
  return Expr(n);
}

Expr Expr::bump(int index, Expr t) {
  if (index < 1) throw Error(ErrorCode::invalid_argument, "bump index must be >= 1");
  auto n = std::make_shared<Node>();
  n->op = Op::bump;
  n->bump = index;
  n->args = {std::move(t)};
  return Expr(n);
}

Expr Expr::ite(Expr cond, Expr then_value, Expr else_value) {
  auto n = std::make_shared<Node>();
  n->op = Op::ite;
  n->args = {std::move(cond), std::move(then_value), std::move(else_value)};
  return Expr(n);
}

Expr::Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
std::size_t Expr::index() const { return node_->index; }
int Expr::bump_index() const { return node_->bump; }
const std::vector<Expr>& Expr::args() const { return node_->args; }

double Expr::eval(const Eigen::VectorXd& x) const {
  const Node& n = *node_;
  auto arg = [&](std::size_t i) { return n.args[i].eval(x); };
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::coord:
      if (n.index >= static_cast<std::size_t>(x.size())) eval_fail("coordinate x" + std::to_string(n.index) + " out of range");
      return x[static_cast<Eigen::Index>(n.index)];
    case Op::radius: return x.norm();
    case Op::neg: return -arg(0);
    case Op::add: return arg(0) + arg(1);
    case Op::sub: return arg(0) - arg(1);
    case Op::mul: return arg(0) * arg(1);
    case Op::div: {
      double num = arg(0);
      double den = arg(1);
      if (den == 0.0) eval_fail("division by zero");
      return num / den;
    }
    case Op::pow: {
      double v = std::pow(arg(0), arg(1));
      if (!std::isfinite(v)) eval_fail("pow is undefined here");
      return v;
    }
    case Op::sqrt: {
      double v = arg(0);
      if (v < 0) eval_fail("sqrt of a negative number");
      return std::sqrt(v);
    }
    case Op::exp: {
      double v = std::exp(arg(0));
      if (!std::isfinite(v)) eval_fail("exp overflow");
      return v;
    }
    case Op::log: {
      double v = arg(0);
      if (!(v > 0)) eval_fail("log of a non-positive number");
      return std::log(v);
    }
    case Op::sin: return std::sin(arg(0));
    case Op::cos: return std::cos(arg(0));
    case Op::atan2: return std::atan2(arg(0), arg(1));
    case Op::abs: return std::fabs(arg(0));
    case Op::bump: return bump_value(n.bump, arg(0));
    case Op::ite: return arg(0) != 0.0 ? arg(1) : arg(2);
    case Op::lt: return arg(0) < arg(1) ? 1.0 : 0.0;
    case Op::le: return arg(0) <= arg(1) ? 1.0 : 0.0;
    case Op::gt: return arg(0) > arg(1) ? 1.0 : 0.0;
    case Op::ge: return arg(0) >= arg(1) ? 1.0 : 0.0;
    case Op::eq: return arg(0) == arg(1) ? 1.0 : 0.0;
    case Op::ne: return arg(0) != arg(1) ? 1.0 : 0.0;
    case Op::logical_and: return (arg(0) != 0.0 && arg(1) != 0.0) ? 1.0 : 0.0;
    case Op::logical_or: return (arg(0) != 0.0 || arg(1) != 0.0) ? 1.0 : 0.0;
  }
  eval_fail("unknown operation");
}

std::size_t Expr::arity() const {
  const Node& n = *node_;
  std::size_t a = n.op == Op::coord ? n.index + 1 : 0;
  for (const auto& c : n.args) a = std::max(a, c.arity());
  return a;
}

std::string Expr::to_string() const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::constant:
      if (n.value < 0 || (n.value == 0 && std::signbit(n.value))) return "(-" + format_number(-n.value) + ")";
      return format_number(n.value);
    case Op::coord: return "x" + std::to_string(n.index);
    case Op::radius: return "r";
    case Op::neg: return "(-" + n.args[0].to_string() + ")";
    case Op::bump: return "bump(" + std::to_string(n.bump) + "," + n.args[0].to_string() + ")";
    case Op::ite:
      return "if(" + n.args[0].to_string() + "," + n.args[1].to_string() + "," + n.args[2].to_string() + ")";
    default: break;
  }
  if (const char* f = function_name(n.op)) {
    std::string s = std::string(f) + "(";
    for (std::size_t i = 0; i < n.args.size(); ++i) s += (i ? "," : "") + n.args[i].to_string();
    return s + ")";
  }
  return "(" + n.args[0].to_string() + infix_symbol(n.op) + n.args[1].to_string() + ")";
}

Expr operator-(Expr a) {
  if (a.op() == Expr::Op::constant) return Expr::constant(-a.value());
  return Expr::unary(Expr::Op::neg, std::move(a));
}
Expr operator+(Expr a, Expr b) { return Expr::binary(Expr::Op::add, std::move(a), std::move(b)); }
Expr operator-(Expr a, Expr b) { return Expr::binary(Expr::Op::sub, std::move(a), std::move(b)); }
Expr operator*(Expr a, Expr b) { return Expr::binary(Expr::Op::mul, std::move(a), std::move(b)); }
Expr operator/(Expr a, Expr b) { return Expr::binary(Expr::Op::div, std::move(a), std::move(b)); }
Expr pow(Expr a, Expr b) { return Expr::binary(Expr::Op::pow, std::move(a), std::move(b)); }
Expr sqrt(Expr a) { return Expr::unary(Expr::Op::sqrt, std::move(a)); }
Expr exp(Expr a) { return Expr::unary(Expr::Op::exp, std::move(a)); }
Expr log(Expr a) { return Expr::unary(Expr::Op::log, std::move(a)); }
Expr sin(Expr a) { return Expr::unary(Expr::Op::sin, std::move(a)); }
Expr cos(Expr a) { return Expr::unary(Expr::Op::cos, std::move(a)); }
Expr atan2(Expr y, Expr x) { return Expr::binary(Expr::Op::atan2, std::move(y), std::move(x)); }
Expr abs(Expr a) { return Expr::unary(Expr::Op::abs, std::move(a)); }
Expr operator<(Expr a, Expr b) { return Expr::binary(Expr::Op::lt, std::move(a), std::move(b)); }
Expr operator<=(Expr a, Expr b) { return Expr::binary(Expr::Op::le, std::move(a), std::move(b)); }
Expr operator>(Expr a, Expr b) { return Expr::binary(Expr::Op::gt, std::move(a), std::move(b)); }
Expr operator>=(Expr a, Expr b) { return Expr::binary(Expr::Op::ge, std::move(a), std::move(b)); }
Expr operator&&(Expr a, Expr b) { return Expr::binary(Expr::Op::logical_and, std::move(a), std::move(b)); }
Expr operator||(Expr a, Expr b) { return Expr::binary(Expr::Op::logical_or, std::move(a), std::move(b)); }

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::string_view field) : text_(text), field_(field) {}

  Expr parse() {
    Expr e = parse_or();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::parse_error,
                std::string(field_) + ": " + what + " at offset " + std::to_string(pos_) + " in \"" + std::string(text_) + "\"");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view token) {
    if (!accept(token)) fail("expected '" + std::string(token) + "'");
  }

  Expr parse_or() {
    Expr e = parse_and();
    while (accept("||")) e = e || parse_and();
    return e;
  }

  Expr parse_and() {
    Expr e = parse_cmp();
    while (accept("&&")) e = e && parse_cmp();
    return e;
  }

  Expr parse_cmp() {
    Expr e = parse_add();
    if (accept("<=")) return Expr::binary(Expr::Op::le, e, parse_add());
    if (accept(">=")) return Expr::binary(Expr::Op::ge, e, parse_add());
    if (accept("==")) return Expr::binary(Expr::Op::eq, e, parse_add());
    if (accept("!=")) return Expr::binary(Expr::Op::ne, e, parse_add());
    if (accept("<")) return Expr::binary(Expr::Op::lt, e, parse_add());
    if (accept(">")) return Expr::binary(Expr::Op::gt, e, parse_add());
    return e;
  }

  Expr parse_add() {
    Expr e = parse_mul();
    for (;;) {
      if (accept("+")) {
        e = e + parse_mul();
      } else if (accept("-")) {
        e = e - parse_mul();
      } else {
        return e;
      }
    }
  }

  Expr parse_mul() {
    Expr e = parse_unary();
    for (;;) {
      if (accept("*")) {
        e = e * parse_unary();
      } else if (accept("/")) {
        e = e / parse_unary();
      } else {
        return e;
      }
    }
  }

  Expr parse_unary() {
    if (accept("-")) return -parse_unary();
    if (accept("+")) return parse_unary();
    Expr base = parse_primary();
    if (accept("^")) return pow(base, parse_unary());
    return base;
  }

  std::vector<Expr> parse_args() {
    expect("(");
    std::vector<Expr> out;
    if (accept(")")) return out;
    do {
      out.push_back(parse_or());
    } while (accept(","));
    expect(")");
    return out;
  }

  Expr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (accept("(")) {
      Expr e = parse_or();
      expect(")");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    std::string token(text_.substr(start, pos_ - start));
    char* end = nullptr;
    double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || !std::isfinite(v)) fail("bad number '" + token + "'");
    return Expr::constant(v);
  }

  Expr parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    skip_space();
    bool call = pos_ < text_.size() && text_[pos_] == '(';
    if (!call) {
      if (name == "x" || name == "y" || name == "z") return Expr::coord(static_cast<std::size_t>(name[0] == 'x' ? 0 : name[0] == 'y' ? 1 : 2));
      if (name == "r") return Expr::radius();
      if (name == "pi") return Expr::constant(std::numbers::pi);
      if (name.size() > 1 && name[0] == 'x' && name.find_first_not_of("0123456789", 1) == std::string::npos) {
        return Expr::coord(std::stoul(name.substr(1)));
      }
      pos_ = start;
      fail("unknown identifier '" + name + "'");
    }
    std::size_t name_pos = start;
    std::vector<Expr> a = parse_args();
    auto want = [&](std::size_t k) {
      if (a.size() != k) {
        pos_ = name_pos;
        fail(name + " takes " + std::to_string(k) + " argument(s)");
      }
    };
    if (name == "sqrt") { want(1); return sqrt(a[0]); }
    if (name == "exp") { want(1); return exp(a[0]); }
    if (name == "log") { want(1); return log(a[0]); }
    if (name == "sin") { want(1); return sin(a[0]); }
    if (name == "cos") { want(1); return cos(a[0]); }
    if (name == "abs") { want(1); return abs(a[0]); }
    if (name == "atan2") { want(2); return atan2(a[0], a[1]); }
    if (name == "pow") { want(2); return pow(a[0], a[1]); }
    if (name == "if") { want(3); return Expr::ite(a[0], a[1], a[2]); }
    if (name == "bump") {
      want(2);
      if (a[0].op() != Expr::Op::constant || a[0].value() < 1 || a[0].value() != std::floor(a[0].value())) {
        pos_ = name_pos;
        fail("bump index must be a positive integer literal");
      }
      return Expr::bump(static_cast<int>(a[0].value()), a[1]);
    }
    pos_ = name_pos;
    fail("unknown function '" + name + "'");
  }

  std::string_view text_;
  std::string_view field_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, std::string_view field) { return Parser(text, field).parse(); }

Expr substitute(const Expr& e, const std::vector<Expr>& replacement) {
  switch (e.op()) {
    case Expr::Op::constant: return e;
    case Expr::Op::coord:
      if (e.index() >= replacement.size()) throw Error(ErrorCode::dim_mismatch, "substitution misses a coordinate");
      return replacement[e.index()];
    case Expr::Op::radius: {
      Expr sum = replacement.front() * replacement.front();
      for (std::size_t i = 1; i < replacement.size(); ++i) sum = sum + replacement[i] * replacement[i];
      return sqrt(sum);
    }
    case Expr::Op::bump: return Expr::bump(e.bump_index(), substitute(e.args()[0], replacement));
    case Expr::Op::ite:
      return Expr::ite(substitute(e.args()[0], replacement), substitute(e.args()[1], replacement),
                       substitute(e.args()[2], replacement));
    default: break;
  }
  if (e.args().size() == 1) return Expr::unary(e.op(), substitute(e.args()[0], replacement));
  return Expr::binary(e.op(), substitute(e.args()[0], replacement), substitute(e.args()[1], replacement));
}

MapExpr::MapExpr(std::size_t in_dim, std::vector<Expr> components, Region domain)
    : in_dim_(in_dim), components_(std::move(components)), domain_(std::move(domain)) {
  if (in_dim_ == 0 || components_.empty()) throw Error(ErrorCode::invalid_argument, "map dimensions must be >= 1");
  if (domain_.dim() != in_dim_) throw Error(ErrorCode::dim_mismatch, "map domain dimension differs from input dimension");
  for (const auto& c : components_) {
    if (c.arity() > in_dim_) throw Error(ErrorCode::dim_mismatch, "map component uses a coordinate beyond the input dimension");
  }
}

MapExpr::MapExpr(std::size_t in_dim, std::vector<Expr> components)
    : MapExpr(in_dim, std::move(components), Region::full_space(in_dim)) {}

MapExpr MapExpr::identity(std::size_t dim) { return identity(Region::full_space(dim)); }

MapExpr MapExpr::identity(Region domain) {
  std::vector<Expr> c;
  for (std::size_t i = 0; i < domain.dim(); ++i) c.push_back(Expr::coord(i));
  std::size_t d = domain.dim();
  return MapExpr(d, std::move(c), std::move(domain));
}

MapExpr MapExpr::linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  return linear(a, b, Region::full_space(static_cast<std::size_t>(a.cols())));
}

MapExpr MapExpr::linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, Region domain) {
  if (b.size() != a.rows()) throw Error(ErrorCode::dim_mismatch, "affine offset");
  std::vector<Expr> c;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Expr row = Expr::constant(b[i]);
    bool started = b[i] != 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) == 0.0) continue;
      Expr term = a(i, j) == 1.0 ? Expr::coord(static_cast<std::size_t>(j))
                                 : Expr::constant(a(i, j)) * Expr::coord(static_cast<std::size_t>(j));
      row = started ? row + term : term;
      started = true;
    }
    c.push_back(row);
  }
  return MapExpr(static_cast<std::size_t>(a.cols()), std::move(c), std::move(domain));
}

MapExpr MapExpr::parse(std::size_t in_dim, const std::vector<std::string>& components, Region domain,
                       std::string_view field) {
  std::vector<Expr> c;
  for (std::size_t i = 0; i < components.size(); ++i) {
    c.push_back(parse_expr(components[i], std::string(field) + "[" + std::to_string(i) + "]"));
  }
  try {
    return MapExpr(in_dim, std::move(c), std::move(domain));
  } catch (const Error& e) {
    throw Error(ErrorCode::parse_error, std::string(field) + ": " + e.what());
  }
}

Eigen::VectorXd MapExpr::eval_unrestricted(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != in_dim_) throw Error(ErrorCode::dim_mismatch, "map input dimension");
  Eigen::VectorXd y(static_cast<Eigen::Index>(components_.size()));
  for (std::size_t i = 0; i < components_.size(); ++i) {
    double v = components_[i].eval(x);
    if (!std::isfinite(v)) eval_fail("non-finite map value");
    y[static_cast<Eigen::Index>(i)] = v;
  }
  return y;
}

Eigen::VectorXd MapExpr::operator()(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != in_dim_) throw Error(ErrorCode::dim_mismatch, "map input dimension");
  if (!domain_.contains(x)) eval_fail("point outside the map domain");
  return eval_unrestricted(x);
}

MapExpr MapExpr::with_domain(Region domain) const { return MapExpr(in_dim_, components_, std::move(domain)); }

MapExpr MapExpr::compose(const MapExpr& inner) const {
  if (inner.out_dim() != in_dim_) throw Error(ErrorCode::dim_mismatch, "composition");
  std::vector<Expr> c;
  for (const auto& e : components_) c.push_back(substitute(e, inner.components()));
  return MapExpr(inner.in_dim(), std::move(c), inner.domain());
}

MapExpr MapExpr::left_multiply(const Eigen::MatrixXd& a) const {
  if (static_cast<std::size_t>(a.cols()) != out_dim()) throw Error(ErrorCode::dim_mismatch, "left multiplication");
  MapExpr lin = linear(a, Eigen::VectorXd::Zero(a.rows()));
  return lin.compose(*this);
}

RealMap MapExpr::as_function() const {
  return [m = *this](const Eigen::VectorXd& x) { return m(x); };
}

std::vector<std::string> MapExpr::to_strings() const {
  std::vector<std::string> out;
  for (const auto& c : components_) out.push_back(c.to_string());
  return out;
}

Eigen::MatrixXd jacobian_fd(const MapExpr& f, const Eigen::VectorXd& u, double step) {
  return jacobian_fd(f.as_function(), u, step);
}

Matrix jacobian_fd(const MapExpr& f, const Vector& u, double step) {
  return Matrix::from_real(jacobian_fd(f, u.to_real(), step));
}

}  // namespace orbi
