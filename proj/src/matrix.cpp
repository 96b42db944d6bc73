#include "modham/matrix.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace modham {

Matrix::Matrix(const PrecisionContext& ctx, std::size_t rows, std::size_t cols)
    : ctx_(ctx), rows_(rows), cols_(cols) {
  if (rows == 0 || cols == 0) throw DimensionError("matrix dimensions must be positive");
  data_.reserve(rows * cols);
  for (std::size_t k = 0; k < rows * cols; ++k) data_.emplace_back(ctx);
}

Matrix Matrix::identity(const PrecisionContext& ctx, std::size_t n) {
  Matrix m(ctx, n, n);
  for (std::size_t i = 0; i < n; ++i) mpfr_set_ui(m.raw_at(i, i).raw(), 1, MPFR_RNDN);
  m.symmetric_ = true;
  return m;
}

Matrix Matrix::diagonal(const PrecisionContext& ctx, const std::vector<Real>& diag) {
  if (diag.empty()) throw DimensionError("empty diagonal");
  Matrix m(ctx, diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) mpfr_set(m.raw_at(i, i).raw(), diag[i].raw(), MPFR_RNDN);
  m.symmetric_ = true;
  return m;
}

Matrix& Matrix::symmetrize() {
  if (!square()) throw DimensionError("symmetrize requires a square matrix");
  Real avg(ctx_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = i + 1; j < cols_; ++j) {
      mpfr_add(avg.raw(), data_[i * cols_ + j].raw(), data_[j * cols_ + i].raw(), MPFR_RNDN);
      mpfr_div_2ui(avg.raw(), avg.raw(), 1, MPFR_RNDN);
      mpfr_set(data_[i * cols_ + j].raw(), avg.raw(), MPFR_RNDN);
      mpfr_set(data_[j * cols_ + i].raw(), avg.raw(), MPFR_RNDN);
    }
  }
  symmetric_ = true;
  return *this;
}

Matrix Matrix::transpose() const {
  Matrix t(ctx_, cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) mpfr_set(t.raw_at(j, i).raw(), (*this)(i, j).raw(), MPFR_RNDN);
  t.symmetric_ = symmetric_;
  return t;
}

Real Matrix::max_abs() const {
  Real best(ctx_);
  for (const Real& x : data_)
    if (mpfr_cmpabs(x.raw(), best.raw()) > 0) mpfr_abs(best.raw(), x.raw(), MPFR_RNDN);
  return best;
}

Real Matrix::trace() const {
  if (!square()) throw DimensionError("trace requires a square matrix");
  Real t(ctx_);
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

Real Matrix::asymmetry() const {
  if (!square()) throw DimensionError("asymmetry requires a square matrix");
  Real worst(ctx_), d(ctx_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i + 1; j < cols_; ++j) {
      mpfr_sub(d.raw(), (*this)(i, j).raw(), (*this)(j, i).raw(), MPFR_RNDN);
      if (mpfr_cmpabs(d.raw(), worst.raw()) > 0) mpfr_abs(worst.raw(), d.raw(), MPFR_RNDN);
    }
  return worst;
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw DimensionError("matrix sum: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) mpfr_add(data_[k].raw(), data_[k].raw(), rhs.data_[k].raw(), MPFR_RNDN);
  symmetric_ = symmetric_ && rhs.symmetric_;
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw DimensionError("matrix difference: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) mpfr_sub(data_[k].raw(), data_[k].raw(), rhs.data_[k].raw(), MPFR_RNDN);
  symmetric_ = symmetric_ && rhs.symmetric_;
  return *this;
}

Matrix& Matrix::operator*=(const Real& s) {
  for (Real& x : data_) mpfr_mul(x.raw(), x.raw(), s.raw(), MPFR_RNDN);
  return *this;
}

std::vector<Real> Matrix::column(std::size_t j) const {
  std::vector<Real> c;
  c.reserve(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c.push_back((*this)(i, j));
  return c;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw DimensionError("multiply: inner dimensions " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.rows()) + " differ");
  if (!(a.context() == b.context())) throw DimensionError("multiply: operands use different precision contexts");
  Matrix c(a.context(), a.rows(), b.cols());
  Real prod(a.context());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Real& aik = a(i, k);
      if (aik.is_zero()) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        mpfr_mul(prod.raw(), aik.raw(), b(k, j).raw(), MPFR_RNDN);
        Real& cij = c.raw_at(i, j);
        mpfr_add(cij.raw(), cij.raw(), prod.raw(), MPFR_RNDN);
      }
    }
  }
  return c;
}

Matrix multiply_transposed_left(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("multiply_transposed_left: row counts differ");
  Matrix c(a.context(), a.cols(), b.cols());
  Real prod(a.context());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const Real& aki = a(k, i);
      if (aki.is_zero()) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        mpfr_mul(prod.raw(), aki.raw(), b(k, j).raw(), MPFR_RNDN);
        Real& cij = c.raw_at(i, j);
        mpfr_add(cij.raw(), cij.raw(), prod.raw(), MPFR_RNDN);
      }
    }
  }
  return c;
}

Real max_abs_difference(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("max_abs_difference: shape mismatch");
  Real worst(a.context()), d(a.context());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      mpfr_sub(d.raw(), a(i, j).raw(), b(i, j).raw(), MPFR_RNDN);
      if (mpfr_cmpabs(d.raw(), worst.raw()) > 0) mpfr_abs(worst.raw(), d.raw(), MPFR_RNDN);
    }
  return worst;
}

void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& extra_headers,
                      int significant) {
  out << "# rows=" << m.rows() << " cols=" << m.cols() << "\n";
  out << "# digits=" << m.context().decimal_digits() << " guard=" << m.context().guard_digits() << "\n";
  for (const auto& h : extra_headers) out << "# " << h << "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j).to_string(significant);
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(std::istream& in, const PrecisionContext& ctx) {
  std::size_t rows = 0, cols = 0;
  std::string line;
  std::vector<std::vector<std::string>> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tok;
      while (hs >> tok) {
        if (tok.rfind("rows=", 0) == 0) rows = std::stoul(tok.substr(5));
        if (tok.rfind("cols=", 0) == 0) cols = std::stoul(tok.substr(5));
      }
      continue;
    }
    std::vector<std::string> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    cells.push_back(std::move(row));
  }
  if (rows == 0 || cols == 0) throw ParseError("matrix CSV lacks a rows/cols header");
  if (cells.size() != rows) throw ParseError("matrix CSV row count does not match header");
  Matrix m(ctx, rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (cells[i].size() != cols) throw ParseError("matrix CSV column count does not match header");
    for (std::size_t j = 0; j < cols; ++j) m.raw_at(i, j) = Real(ctx, cells[i][j]);
  }
  return m;
}

}  // namespace modham
