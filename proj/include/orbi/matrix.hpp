#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "orbi/scalar.hpp"

namespace orbi {

class Vector {
 public:
  explicit Vector(std::size_t dim);
  explicit Vector(std::vector<Scalar> entries);
  Vector(std::initializer_list<Scalar> entries) : Vector(std::vector<Scalar>(entries)) {}

  static Vector from_real(const Eigen::VectorXd& v);

  std::size_t dim() const noexcept { return entries_.size(); }
  const Scalar& operator[](std::size_t i) const { return entries_[i]; }
  Scalar& operator[](std::size_t i) { return entries_[i]; }
  const std::vector<Scalar>& entries() const noexcept { return entries_; }

  bool is_exact() const;
  bool is_zero(double tol) const;
  Eigen::VectorXd to_real() const;
  std::string to_string() const;

  friend Vector operator+(const Vector& a, const Vector& b);
  friend Vector operator-(const Vector& a, const Vector& b);
  friend Vector operator*(const Scalar& s, const Vector& v);

 private:
  std::vector<Scalar> entries_;
};

/// Exact equality for exact vectors, Euclidean distance <= tol otherwise.
bool equal(const Vector& a, const Vector& b, double tol);

/// Dense row-major matrix of Scalars.
class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<Scalar> entries);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<Scalar>> rows);
  static Matrix from_real(const Eigen::MatrixXd& m);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  const Scalar& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  Scalar& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const std::vector<Scalar>& entries() const noexcept { return data_; }

  bool is_exact() const;
  double max_abs() const;
  Matrix to_approx() const;
  Eigen::MatrixXd to_real() const;
  Matrix transpose() const;
  Scalar trace() const;

  /// "[[a,b],[c,d]]" using Scalar::to_string for entries.
  std::string to_string() const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator+(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend Matrix operator*(const Scalar& s, const Matrix& m);
  friend Vector operator*(const Matrix& m, const Vector& v);

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Scalar> data_;
};

/// Exact equality when both are exact; otherwise Frobenius distance
/// <= tol * sqrt(rows).
bool equal(const Matrix& a, const Matrix& b, double tol);

/// Frobenius distance for double matrices, compared the same way.
bool equal_real(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol);

}  // namespace orbi
