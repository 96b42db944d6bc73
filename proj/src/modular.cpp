#include "modham/modular.hpp"

#include <algorithm>

namespace modham {

ForbiddenSpectrum::ForbiddenSpectrum(std::size_t index, const Real& lambda, const Real& gap, const std::string& context)
    : std::runtime_error("B eigenvalue " + std::to_string(index) + " = " + lambda.to_string(25) +
                         " lies in the forbidden band (|lambda| - 1 = " + gap.to_string(6) + ")" +
                         (context.empty() ? "" : "; " + context) +
                         "; raise --digits or refine the grid (--cells)"),
      index_(index),
      lambda_(lambda),
      gap_(gap) {}

Matrix build_B(const Matrix& chi_t, const Matrix& a_neg_t, const Matrix& a_pos_t) {
  const std::size_t n = chi_t.rows();
  if (!chi_t.square() || a_neg_t.rows() != n || a_pos_t.rows() != n || !a_neg_t.square() || !a_pos_t.square())
    throw DimensionError("build_B: inconsistent dimensions");
  Matrix left = multiply(multiply(a_pos_t, chi_t), a_neg_t);
  Matrix b = left.transpose();
  b += left;
  b -= Matrix::identity(chi_t.context(), n);
  b.symmetrize();
  return b;
}

Matrix build_B(const Matrix& chi_t, const Matrix& a_neg_t) { return build_B(chi_t, a_neg_t, invert(a_neg_t)); }

namespace {

Real dot(const std::vector<Real>& a, const std::vector<Real>& b) {
  Real s(a.front().precision());
  Real t(a.front().precision());
  for (std::size_t i = 0; i < a.size(); ++i) {
    mpfr_mul(t.raw(), a[i].raw(), b[i].raw(), MPFR_RNDN);
    mpfr_add(s.raw(), s.raw(), t.raw(), MPFR_RNDN);
  }
  return s;
}

void axpy(std::vector<Real>& y, const Real& alpha, const std::vector<Real>& x) {
  Real t(alpha.precision());
  for (std::size_t i = 0; i < y.size(); ++i) {
    mpfr_mul(t.raw(), alpha.raw(), x[i].raw(), MPFR_RNDN);
    mpfr_sub(y[i].raw(), y[i].raw(), t.raw(), MPFR_RNDN);
  }
}

std::vector<Real> mat_vec(const Matrix& a, const std::vector<Real>& x) {
  std::vector<Real> y(a.rows(), Real(a.context()));
  Real t(a.context());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      mpfr_mul(t.raw(), a(i, j).raw(), x[j].raw(), MPFR_RNDN);
      mpfr_add(y[i].raw(), y[i].raw(), t.raw(), MPFR_RNDN);
    }
  return y;
}

// Modified Gram-Schmidt with one reorthogonalization pass; candidates whose
// residual falls below `drop` (relative to their norm) are discarded.
std::vector<std::vector<Real>> orthonormalize(std::vector<std::vector<Real>> candidates, const Real& drop) {
  std::vector<std::vector<Real>> q;
  for (auto& v : candidates) {
    const Real norm0 = sqrt(dot(v, v));
    if (norm0.is_zero()) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : q) axpy(v, dot(u, v), u);
    const Real norm = sqrt(dot(v, v));
    if (norm <= drop * norm0) continue;
    for (auto& x : v) x /= norm;
    q.push_back(std::move(v));
  }
  return q;
}

}  // namespace

StandardSubspace standard_subspace(const Matrix& chi_t, const Matrix& a_neg_t, const Matrix& a_pos_t) {
  const PrecisionContext& ctx = chi_t.context();
  const std::size_t n = chi_t.rows();
  const SymEigen chi_eig = sym_eigen(chi_t);
  const Real half(ctx, 0.5);
  std::vector<std::size_t> range, kernel;
  for (std::size_t i = 0; i < n; ++i) (chi_eig.eigenvalues[i] > half ? range : kernel).push_back(i);

  StandardSubspace out{Matrix::identity(ctx, n), 0, 0};
  const std::vector<std::size_t>* generators = nullptr;
  if (2 * range.size() < n) {
    generators = &range;
    out.structural_eigenvalue = -1;
  } else if (2 * kernel.size() < n) {
    generators = &kernel;
    out.structural_eigenvalue = 1;
  } else {
    return out;
  }
  std::vector<std::vector<Real>> candidates;
  for (std::size_t idx : *generators) {
    const std::vector<Real> y = chi_eig.eigenvectors.column(idx);
    candidates.push_back(mat_vec(a_neg_t, y));
    candidates.push_back(mat_vec(a_pos_t, y));
  }
  const auto q = orthonormalize(std::move(candidates), pow10(ctx, -ctx.decimal_digits() / 2));
  if (q.empty()) {
    out.basis = Matrix(ctx, n, 1);
    out.structural_dim = n;
    return out;
  }
  Matrix basis(ctx, n, q.size());
  for (std::size_t j = 0; j < q.size(); ++j)
    for (std::size_t i = 0; i < n; ++i) basis(i, j) = q[j][i];
  out.basis = std::move(basis);
  out.structural_dim = n - q.size();
  return out;
}

namespace {

GatedSpectrum gate_eigen(SymEigen eig, const Real& epsilon, const std::string& context) {
  const PrecisionContext& ctx = eig.eigenvectors.context();
  std::optional<Real> min_gap;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < eig.eigenvalues.size(); ++i) {
    Real gap = abs(eig.eigenvalues[i]) - Real(ctx, 1L);
    if (!min_gap || gap < *min_gap) {
      min_gap = gap;
      worst = i;
    }
  }
  if (!(*min_gap > epsilon)) throw ForbiddenSpectrum(worst, eig.eigenvalues[worst], *min_gap, context);
  return GatedSpectrum{std::move(eig), *min_gap, epsilon};
}

}  // namespace

GatedSpectrum spectrum_gate(const Matrix& b, const Real& epsilon) { return gate_eigen(sym_eigen(b), epsilon, ""); }

GatedSpectrum spectrum_gate(const Matrix& b, const StandardSubspace& subspace, const Real& epsilon) {
  const PrecisionContext& ctx = b.context();
  if (subspace.structural_dim == b.rows()) {
    const Real lambda(ctx, static_cast<long>(subspace.structural_eigenvalue));
    throw ForbiddenSpectrum(0, lambda, Real(ctx), "B = " + std::string(lambda.sign() < 0 ? "-" : "+") +
                                                      "1 on the whole space: the region covers no element or all of them");
  }
  if (subspace.structural_dim == 0) return spectrum_gate(b, epsilon);
  Matrix reduced = multiply_transposed_left(subspace.basis, multiply(b, subspace.basis));
  reduced.symmetrize();
  SymEigen eig = sym_eigen(reduced);
  eig.eigenvectors = multiply(subspace.basis, eig.eigenvectors);
  return gate_eigen(std::move(eig), epsilon, std::to_string(subspace.structural_dim) +
                                                 " structural eigenvalues at " +
                                                 std::to_string(subspace.structural_eigenvalue) + " removed");
}

Matrix build_M(const GatedSpectrum& gate, const Matrix& a_neg_t, const Matrix& a_pos_t, Sign sign) {
  const Matrix arc = matrix_function([](const Real& x) { return arcoth(x); }, gate.eigen);
  const Matrix& a = sign == Sign::kMinus ? a_neg_t : a_pos_t;
  Matrix m = multiply(multiply(a, arc), a);
  m *= Real(a.context(), 2L);
  m.symmetrize();
  return m;
}

}  // namespace modham
