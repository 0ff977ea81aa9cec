#pragma once

// Reference computations written without the library's algorithms, used
// to derive expected values.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

namespace orbi::oracle {

/// Distinct points among g u, compared at `tol`.
inline std::size_t orbit_size(const std::vector<Eigen::MatrixXd>& elements, const Eigen::VectorXd& u, double tol) {
  std::vector<Eigen::VectorXd> seen;
  for (const auto& g : elements) {
    Eigen::VectorXd v = g * u;
    bool dup = false;
    for (const auto& w : seen) dup = dup || (w - v).norm() <= tol;
    if (!dup) seen.push_back(v);
  }
  return seen.size();
}

inline std::size_t stabilizer_size(const std::vector<Eigen::MatrixXd>& elements, const Eigen::VectorXd& u, double tol) {
  std::size_t n = 0;
  for (const auto& g : elements) n += (g * u - u).norm() <= tol ? 1 : 0;
  return n;
}

/// Sum of g^T g.
inline Eigen::MatrixXd averaged_gram(const std::vector<Eigen::MatrixXd>& elements) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(elements.front().rows(), elements.front().cols());
  for (const auto& g : elements) s += g.transpose() * g;
  return s;
}

inline double form_norm(const Eigen::MatrixXd& gram, const Eigen::VectorXd& v) { return std::sqrt(v.dot(gram * v)); }

/// Sign picked up by continuing sqrt(z) once around the unit circle:
/// -1 means the branch flips, i.e. monodromy -I for z -> +-sqrt(z).
inline int sqrt_monodromy_sign(std::size_t steps = 720) {
  std::complex<double> w = 1.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(steps);
    std::complex<double> r = std::sqrt(std::polar(1.0, t));
    w = std::abs(r - w) < std::abs(-r - w) ? r : -r;
  }
  return w.real() > 0 ? 1 : -1;
}

/// The homomorphism C4 -> C4 induced on the annulus 1/(n+1) < r < 1/n by
/// the second counterexample: (x, y) -> s(r) (r, 0) is constant on orbits
/// (trivial), (x, y) -> s(r) (x, y) commutes with rotations (identity).
inline bool example2_annulus_is_trivial(int n) { return n % 2 == 0; }

}  // namespace orbi::oracle
