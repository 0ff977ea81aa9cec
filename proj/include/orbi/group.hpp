#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "orbi/linalg.hpp"
#include "orbi/matrix.hpp"

namespace orbi {

inline constexpr std::size_t kDefaultClosureCap = 10000;

/// A finite subgroup of GL(n, R) stored as an explicit element list.
///
/// Element 0 is always the identity; the remaining elements appear in
/// breadth-first discovery order. The multiplication table is complete:
/// `multiply(i, j)` is the index of element(i) * element(j). Exact groups
/// compare elements exactly, approximate groups by Frobenius distance
/// <= tolerance * sqrt(n).
class FiniteMatrixGroup {
 public:
  std::size_t dim() const noexcept { return dim_; }
  std::size_t order() const noexcept { return elements_.size(); }
  ScalarMode mode() const noexcept { return mode_; }
  double tolerance() const noexcept { return tolerance_; }

  const Matrix& element(std::size_t i) const { return elements_.at(i); }
  const std::vector<Matrix>& elements() const noexcept { return elements_; }
  const Eigen::MatrixXd& real_element(std::size_t i) const { return real_.at(i); }

  std::size_t multiply(std::size_t i, std::size_t j) const { return table_[i * order() + j]; }
  std::size_t inverse(std::size_t i) const { return inverses_.at(i); }
  std::size_t element_order(std::size_t i) const;

  std::optional<std::size_t> find(const Matrix& m) const;
  /// Nearest element within `tol` (Frobenius, dimension normalized).
  std::optional<std::size_t> find_real(const Eigen::MatrixXd& m, double tol) const;

  /// A small generating set (greedy, deterministic).
  const std::vector<std::size_t>& generators() const noexcept { return generators_; }

  /// The subgroup on the given element indices. Indices must form a
  /// subgroup containing 0; the result keeps their relative order.
  FiniteMatrixGroup subgroup(const std::vector<std::size_t>& indices) const;

  bool is_trivial() const noexcept { return order() == 1; }

  /// Element list for reports, e.g. "{[[1,0],[0,1]], ...}".
  std::string describe() const;

  friend FiniteMatrixGroup close_generators(const std::vector<Matrix>& gens, std::size_t cap, double tol);
  friend FiniteMatrixGroup trivial_group(std::size_t dim);

 private:
  FiniteMatrixGroup() = default;
  std::size_t add_element(Matrix m);
  void build_tables();
  void pick_generators();
  std::string key(const Matrix& m) const;

  std::size_t dim_ = 0;
  ScalarMode mode_ = ScalarMode::exact;
  double tolerance_ = kDefaultTolerance;
  std::vector<Matrix> elements_;
  std::vector<Eigen::MatrixXd> real_;
  std::vector<std::size_t> table_;
  std::vector<std::size_t> inverses_;
  std::vector<std::size_t> generators_;
  std::unordered_map<std::string, std::size_t> exact_index_;
};

/// Breadth-first closure of the generators under multiplication.
/// Throws Singular for a non-invertible generator, NotFinite once more than
/// `cap` elements appear. Use trivial_group for an empty generator list.
FiniteMatrixGroup close_generators(const std::vector<Matrix>& gens, std::size_t cap = kDefaultClosureCap,
                                   double tol = kDefaultTolerance);

FiniteMatrixGroup trivial_group(std::size_t dim);

/// A map between groups given by element indices: image[i] is the target
/// index of the image of source element i.
struct GroupHomomorphism {
  std::vector<std::size_t> image;

  bool is_injective() const;
  bool is_identity_map() const;
  bool is_trivial() const;
  friend bool operator==(const GroupHomomorphism&, const GroupHomomorphism&) = default;
};

bool is_homomorphism(const FiniteMatrixGroup& source, const FiniteMatrixGroup& target, const GroupHomomorphism& h);

/// Elements fixing u. The exact overload works on rational points, the real
/// one with tolerance |gu - u| <= tol * max(1, |u|).
std::vector<std::size_t> stabilizer_indices(const FiniteMatrixGroup& g, const Vector& u);
std::vector<std::size_t> stabilizer_indices(const FiniteMatrixGroup& g, const Eigen::VectorXd& u, double tol);
FiniteMatrixGroup stabilizer(const FiniteMatrixGroup& g, const Vector& u);
FiniteMatrixGroup stabilizer(const FiniteMatrixGroup& g, const Eigen::VectorXd& u, double tol);

std::vector<Vector> orbit(const FiniteMatrixGroup& g, const Vector& u);
std::vector<Eigen::VectorXd> orbit(const FiniteMatrixGroup& g, const Eigen::VectorXd& u, double tol);

/// The Gram matrix of the averaged inner product, sum over the group of
/// g^T g. Exact groups give an exact Gram matrix.
struct InvariantGram {
  Matrix gram;
  Eigen::MatrixXd real;
};

InvariantGram invariant_gram(const FiniteMatrixGroup& g);

/// Exact inputs return the squared form v^T G v (stays rational); anything
/// approximate returns the norm itself.
Scalar gamma_norm(const InvariantGram& gr, const Vector& v);
double gamma_norm(const InvariantGram& gr, const Eigen::VectorXd& v);

/// True iff the fixed subspace of g has codimension one.
bool is_reflection(const Matrix& g, double tol = kDefaultTolerance);
bool is_reflection_free(const FiniteMatrixGroup& g);

}  // namespace orbi
