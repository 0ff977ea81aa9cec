#include "orbi/matrix.hpp"

#include <cmath>

#include "orbi/error.hpp"

namespace orbi {

Vector::Vector(std::size_t dim) : entries_(dim) {
  if (dim == 0) throw Error(ErrorCode::invalid_argument, "vector dimension must be >= 1");
}

Vector::Vector(std::vector<Scalar> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error(ErrorCode::invalid_argument, "vector dimension must be >= 1");
}

Vector Vector::from_real(const Eigen::VectorXd& v) {
  std::vector<Scalar> e;
  e.reserve(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) e.push_back(Scalar::real(v[i]));
  return Vector(std::move(e));
}

bool Vector::is_exact() const {
  for (const auto& s : entries_) {
    if (!s.is_exact()) return false;
  }
  return true;
}

bool Vector::is_zero(double tol) const {
  for (const auto& s : entries_) {
    if (!s.is_zero(tol)) return false;
  }
  return true;
}

Eigen::VectorXd Vector::to_real() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) v[static_cast<Eigen::Index>(i)] = entries_[i].to_double();
  return v;
}

std::string Vector::to_string() const {
  std::string out = "(";
  for (std::size_t i = 0; i < dim(); ++i) {
    if (i) out += ",";
    out += entries_[i].to_string();
  }
  return out + ")";
}

Vector operator+(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::dim_mismatch, "vector sum");
  std::vector<Scalar> e(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) e[i] = a[i] + b[i];
  return Vector(std::move(e));
}

Vector operator-(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::dim_mismatch, "vector difference");
  std::vector<Scalar> e(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) e[i] = a[i] - b[i];
  return Vector(std::move(e));
}

Vector operator*(const Scalar& s, const Vector& v) {
  std::vector<Scalar> e(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) e[i] = s * v[i];
  return Vector(std::move(e));
}

bool equal(const Vector& a, const Vector& b, double tol) {
  if (a.dim() != b.dim()) return false;
  if (a.is_exact() && b.is_exact()) {
    for (std::size_t i = 0; i < a.dim(); ++i) {
      if (!(a[i].rational() == b[i].rational())) return false;
    }
    return true;
  }
  return (a.to_real() - b.to_real()).norm() <= tol;
}

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {
  if (rows == 0 || cols == 0) throw Error(ErrorCode::invalid_argument, "matrix dimensions must be >= 1");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<Scalar> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (rows == 0 || cols == 0) throw Error(ErrorCode::invalid_argument, "matrix dimensions must be >= 1");
  if (data_.size() != rows * cols) throw Error(ErrorCode::dim_mismatch, "entry count does not match rows*cols");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<Scalar>> rows) {
  std::size_t r = rows.size();
  std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<Scalar> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw Error(ErrorCode::dim_mismatch, "ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::from_real(const Eigen::MatrixXd& m) {
  Matrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = Scalar::real(m(i, j));
    }
  }
  return out;
}

bool Matrix::is_exact() const {
  for (const auto& s : data_) {
    if (!s.is_exact()) return false;
  }
  return true;
}

double Matrix::max_abs() const {
  double m = 0;
  for (const auto& s : data_) m = std::max(m, s.abs_value());
  return m;
}

Matrix Matrix::to_approx() const {
  Matrix out(rows_, cols_);
  for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] = data_[k].to_approx();
  return out;
}

Eigen::MatrixXd Matrix::to_real() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(i, j).to_double();
    }
  }
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

Scalar Matrix::trace() const {
  if (!is_square()) throw Error(ErrorCode::non_square, "trace");
  Scalar t = 0;
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

std::string Matrix::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < rows_; ++i) {
    out += i ? ",[" : "[";
    for (std::size_t j = 0; j < cols_; ++j) {
      if (j) out += ",";
      out += (*this)(i, j).to_string();
    }
    out += "]";
  }
  return out + "]";
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols_ != b.rows_) throw Error(ErrorCode::dim_mismatch, "matrix product");
  Matrix c(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i) {
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Scalar& aik = a(i, k);
      if (aik.is_exact() && aik.is_zero(0)) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error(ErrorCode::dim_mismatch, "matrix sum");
  Matrix c = a;
  for (std::size_t k = 0; k < c.data_.size(); ++k) c.data_[k] += b.data_[k];
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw Error(ErrorCode::dim_mismatch, "matrix difference");
  Matrix c = a;
  for (std::size_t k = 0; k < c.data_.size(); ++k) c.data_[k] -= b.data_[k];
  return c;
}

Matrix operator*(const Scalar& s, const Matrix& m) {
  Matrix c = m;
  for (auto& e : c.data_) e = s * e;
  return c;
}

Vector operator*(const Matrix& m, const Vector& v) {
  if (m.cols_ != v.dim()) throw Error(ErrorCode::dim_mismatch, "matrix-vector product");
  std::vector<Scalar> out(m.rows_);
  for (std::size_t i = 0; i < m.rows_; ++i) {
    for (std::size_t j = 0; j < m.cols_; ++j) out[i] += m(i, j) * v[j];
  }
  return Vector(std::move(out));
}

bool equal(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  if (a.is_exact() && b.is_exact()) {
    for (std::size_t k = 0; k < a.entries().size(); ++k) {
      if (!(a.entries()[k].rational() == b.entries()[k].rational())) return false;
    }
    return true;
  }
  return equal_real(a.to_real(), b.to_real(), tol);
}

bool equal_real(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a - b).norm() <= tol * std::sqrt(static_cast<double>(a.rows()));
}

}  // namespace orbi
