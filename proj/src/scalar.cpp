#include "orbi/scalar.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "orbi/error.hpp"

namespace orbi {

Scalar Scalar::rational(long num, long den) {
  if (den == 0) throw Error(ErrorCode::invalid_argument, "zero denominator");
  return Scalar(mpq_class(num, den));
}

const mpq_class& Scalar::rational() const {
  if (!is_exact()) throw Error(ErrorCode::invalid_argument, "scalar is not exact");
  return std::get<mpq_class>(value_);
}

double Scalar::to_double() const {
  if (is_exact()) return std::get<mpq_class>(value_).get_d();
  return std::get<double>(value_);
}

bool Scalar::is_zero(double tol) const {
  if (is_exact()) return sgn(std::get<mpq_class>(value_)) == 0;
  return std::abs(std::get<double>(value_)) <= tol;
}

double Scalar::abs_value() const { return std::abs(to_double()); }

int Scalar::sign() const {
  if (is_exact()) return sgn(std::get<mpq_class>(value_));
  double v = std::get<double>(value_);
  return (v > 0) - (v < 0);
}

std::string Scalar::to_string() const {
  if (is_exact()) return std::get<mpq_class>(value_).get_str();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(value_));
  return buf;
}

Scalar Scalar::operator-() const {
  if (is_exact()) return Scalar(mpq_class(-std::get<mpq_class>(value_)));
  return real(-std::get<double>(value_));
}

Scalar& Scalar::operator+=(const Scalar& o) {
  if (is_exact() && o.is_exact()) {
    std::get<mpq_class>(value_) += std::get<mpq_class>(o.value_);
  } else {
    value_ = to_double() + o.to_double();
  }
  return *this;
}

Scalar& Scalar::operator-=(const Scalar& o) {
  if (is_exact() && o.is_exact()) {
    std::get<mpq_class>(value_) -= std::get<mpq_class>(o.value_);
  } else {
    value_ = to_double() - o.to_double();
  }
  return *this;
}

Scalar& Scalar::operator*=(const Scalar& o) {
  if (is_exact() && o.is_exact()) {
    std::get<mpq_class>(value_) *= std::get<mpq_class>(o.value_);
  } else {
    value_ = to_double() * o.to_double();
  }
  return *this;
}

Scalar& Scalar::operator/=(const Scalar& o) {
  if (o.is_exact() && sgn(std::get<mpq_class>(o.value_)) == 0) {
    throw Error(ErrorCode::evaluation_error, "division by exact zero");
  }
  if (is_exact() && o.is_exact()) {
    std::get<mpq_class>(value_) /= std::get<mpq_class>(o.value_);
  } else {
    value_ = to_double() / o.to_double();
  }
  return *this;
}

bool approx_equal(const Scalar& a, const Scalar& b, double tol) {
  if (a.is_exact() && b.is_exact()) return a.rational() == b.rational();
  return std::abs(a.to_double() - b.to_double()) <= tol;
}

int compare(const Scalar& a, const Scalar& b, double tol) {
  if (a.is_exact() && b.is_exact()) {
    int c = cmp(a.rational(), b.rational());
    return (c > 0) - (c < 0);
  }
  double d = a.to_double() - b.to_double();
  if (std::abs(d) <= tol) return 0;
  return d < 0 ? -1 : 1;
}

namespace {

bool is_integer_text(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

std::string strip_plus(std::string_view s) {
  std::string out(s);
  if (!out.empty() && out[0] == '+') out.erase(0, 1);
  return out;
}

}  // namespace

Scalar parse_scalar(std::string_view text, ScalarMode mode, std::string_view field) {
  auto fail = [&](const std::string& why) -> Scalar {
    throw Error(ErrorCode::parse_error, "field '" + std::string(field) + "': " + why + " (got \"" + std::string(text) + "\")");
  };
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) return fail("empty number");

  auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    auto num = text.substr(0, slash);
    auto den = text.substr(slash + 1);
    if (!is_integer_text(num) || !is_integer_text(den)) return fail("malformed rational");
    mpq_class q(mpz_class(strip_plus(num)), mpz_class(strip_plus(den)));
    if (q.get_den() == 0) return fail("zero denominator");
    q.canonicalize();
    Scalar s(q);
    return mode == ScalarMode::exact ? s : s.to_approx();
  }
  if (is_integer_text(text)) {
    Scalar s(mpq_class(mpz_class(strip_plus(text))));
    return mode == ScalarMode::exact ? s : s.to_approx();
  }
  if (mode == ScalarMode::exact) return fail("exact mode requires an integer or rational \"p/q\"");
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) return fail("malformed decimal");
  return Scalar::real(v);
}

}  // namespace orbi
