#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "modham/matrix.hpp"
#include "modham/precision.hpp"

namespace modham {

class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(std::size_t index, const std::string& pivot)
      : std::runtime_error("matrix is not positive definite: pivot " + std::to_string(index) + " = " + pivot),
        index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class SingularMatrix : public std::runtime_error {
 public:
  SingularMatrix(std::size_t index, const std::string& magnitude)
      : std::runtime_error("matrix is singular at working precision: pivot " + std::to_string(index) +
                           " has magnitude " + magnitude),
        index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// DomainError raised by matrix_function, carrying the offending eigenvalue.
class EigenvalueDomainError : public DomainError {
 public:
  EigenvalueDomainError(std::size_t index, const Real& value, const std::string& cause)
      : DomainError("eigenvalue " + std::to_string(index) + " = " + value.to_string(40) +
                    " outside function domain: " + cause),
        index_(index),
        value_(value) {}
  std::size_t index() const { return index_; }
  const Real& value() const { return value_; }

 private:
  std::size_t index_;
  Real value_;
};

/// Lower-triangular L with G = L L^T. Throws NotPositiveDefinite.
Matrix cholesky(const Matrix& g);

/// Inverse of a lower-triangular matrix by forward substitution.
Matrix invert_lower(const Matrix& l);

/// Inverse of a square matrix. Symmetric inputs go through Cholesky first;
/// if that fails (or the input is not symmetric) partial-pivot LU is used.
/// Throws SingularMatrix when a pivot falls below 10^{-digits/2} * max|A|.
Matrix invert(const Matrix& a);

/// Solves G x = rhs for symmetric positive definite G.
std::vector<Real> solve_spd(const Matrix& g, const std::vector<Real>& rhs);

/// Spectral decomposition of a symmetric matrix.
struct SymEigen {
  std::vector<Real> eigenvalues;  // ascending
  Matrix eigenvectors;            // columns orthonormal; may have fewer columns than rows
  Real residual;                  // max |A U - U Lambda|
  int sweeps = 0;
};

struct JacobiOptions {
  /// 0 selects the default, 100 * log10(digits).
  int max_sweeps = 0;
};

/// Cyclic Jacobi eigensolver.
///
/// Rotations are applied in row-cyclic order (p = 0..n-2, q = p+1..n-1),
/// so the result is a deterministic function of the input and context.
/// Iterates until the off-diagonal Frobenius mass drops below
/// 10^{-(digits + guard/2)} * ||A||_F or a full sweep performs no rotation.
SymEigen sym_eigen(const Matrix& a, JacobiOptions options = {});

/// U f(Lambda) U^T, symmetrized. DomainErrors from f are rethrown as
/// EigenvalueDomainError with the offending index and value.
Matrix matrix_function(const std::function<Real(const Real&)>& f, const SymEigen& eig);

/// L^{-1} X L^{-T}, given the already inverted factor L^{-1}.
Matrix congruence(const Matrix& l_inv, const Matrix& x);

/// U Lambda U^T for the given eigensystem.
Matrix spectral_reconstruction(const SymEigen& eig);

}  // namespace modham
