#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "modham/precision.hpp"

namespace modham {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense real matrix at arbitrary precision, row-major.
///
/// All entries share the matrix's PrecisionContext. The symmetry flag is set
/// only by symmetrize() (or builders that call it) and is cleared by any
/// mutable element access.
class Matrix {
 public:
  Matrix(const PrecisionContext& ctx, std::size_t rows, std::size_t cols);
  static Matrix identity(const PrecisionContext& ctx, std::size_t n);
  static Matrix diagonal(const PrecisionContext& ctx, const std::vector<Real>& diag);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  const PrecisionContext& context() const { return ctx_; }

  const Real& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  Real& operator()(std::size_t i, std::size_t j) {
    symmetric_ = false;
    return data_[i * cols_ + j];
  }
  /// Mutable access that keeps the symmetry flag (caller keeps symmetry).
  Real& raw_at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  bool symmetric() const { return symmetric_; }
  /// Replaces the matrix by (A + A^T)/2 and sets the symmetry flag.
  Matrix& symmetrize();

  Matrix transpose() const;
  Real max_abs() const;
  Real trace() const;
  /// Max |A_jk - A_kj|.
  Real asymmetry() const;

  Matrix& operator+=(const Matrix& rhs);
  Matrix& operator-=(const Matrix& rhs);
  Matrix& operator*=(const Real& s);
  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

  /// Column j as a std::vector (copy).
  std::vector<Real> column(std::size_t j) const;

 private:
  PrecisionContext ctx_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Real> data_;
  bool symmetric_ = false;
};

Matrix multiply(const Matrix& a, const Matrix& b);
/// a^T * b without forming the transpose.
Matrix multiply_transposed_left(const Matrix& a, const Matrix& b);
/// Max-entry norm of a - b.
Real max_abs_difference(const Matrix& a, const Matrix& b);

/// CSV dump: `#`-prefixed header lines (rows, cols, digits, caller extras),
/// then one matrix row per line with full-precision decimal entries.
void write_matrix_csv(std::ostream& out, const Matrix& m,
                      const std::vector<std::string>& extra_headers = {}, int significant = 0);
/// Reads the format written by write_matrix_csv.
Matrix read_matrix_csv(std::istream& in, const PrecisionContext& ctx);

}  // namespace modham
