#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <variant>

namespace orbi {

enum class ScalarMode { exact, approx };

inline constexpr double kDefaultTolerance = 1e-9;

/// A number that is either an exact rational or a 64-bit float.
///
/// Arithmetic between two exact values stays exact; anything touching an
/// approximate value degrades to double. Tolerances are not stored per value,
/// they are passed to the comparison helpers by the owning object.
class Scalar {
 public:
  Scalar() : value_(mpq_class(0)) {}
  Scalar(int v) : value_(mpq_class(v)) {}  // NOLINT: literal convenience
  Scalar(long v) : value_(mpq_class(v)) {}  // NOLINT
  explicit Scalar(mpq_class q) : value_(std::move(q)) { std::get<mpq_class>(value_).canonicalize(); }

  static Scalar rational(long num, long den);
  static Scalar real(double v) { Scalar s; s.value_ = v; return s; }

  bool is_exact() const noexcept { return std::holds_alternative<mpq_class>(value_); }
  ScalarMode mode() const noexcept { return is_exact() ? ScalarMode::exact : ScalarMode::approx; }

  /// Throws if the value is approximate.
  const mpq_class& rational() const;
  double to_double() const;

  /// Converts to approx mode; exact values are rounded.
  Scalar to_approx() const { return real(to_double()); }

  bool is_zero(double tol) const;
  double abs_value() const;
  int sign() const;

  /// Exact values print as "p" or "p/q"; approximate values with 17
  /// significant digits so they parse back to the same double.
  std::string to_string() const;

  Scalar operator-() const;
  Scalar& operator+=(const Scalar& o);
  Scalar& operator-=(const Scalar& o);
  Scalar& operator*=(const Scalar& o);
  Scalar& operator/=(const Scalar& o);

  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
  friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }

  /// Bit-exact identity: same mode and same value.
  friend bool operator==(const Scalar& a, const Scalar& b) { return a.value_ == b.value_; }

 private:
  std::variant<mpq_class, double> value_;
};

/// Exact comparison when both sides are exact, |a-b| <= tol otherwise.
bool approx_equal(const Scalar& a, const Scalar& b, double tol);

/// Lexicographic-style three-way comparison with tolerance (0 when equal
/// under approx_equal).
int compare(const Scalar& a, const Scalar& b, double tol);

/// Parses "p", "p/q" or (approx mode only) a decimal such as "0.5" or "1e-3".
/// Exact mode rejects decimals; the error message names `field`.
Scalar parse_scalar(std::string_view text, ScalarMode mode, std::string_view field = "value");

}  // namespace orbi
