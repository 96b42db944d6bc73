#include <algorithm>

#include "modham/modular.hpp"

namespace modham {

namespace {

Real idempotence_defect(const Matrix& p) { return max_abs_difference(multiply(p, p), p); }

}  // namespace

ModularResult run_pipeline(const PrecisionContext& ctx, const PipelineConfig& config) {
  if (config.mass.sign() <= 0) throw DomainError("mass must be positive (approach m = 0 through small m)");
  Grid grid(ctx, config.n_cells, config.half_width);
  BasisSet basis = build_basis(grid, config.region, config.mode);

  const Matrix chi_t = orthonormal_frame(basis, chi_matrix(basis, grid, config.region));
  const Real chi_defect = idempotence_defect(chi_t);

  APowerResult a_power = a_power_matrix(basis, grid, config.mass, Real::ratio(ctx, -1, 4), config.a_power);
  Matrix a_neg_t = orthonormal_frame(basis, a_power.matrix);
  Matrix a_pos_t = invert(a_neg_t);
  a_pos_t.symmetrize();
  const Matrix b = build_B(chi_t, a_neg_t, a_pos_t);

  // Rounding in B is amplified by the conditioning of A^{-1/4}; eigenvalues
  // closer to the band than this are indistinguishable from it.
  Real epsilon = pow10(ctx, -ctx.decimal_digits());
  epsilon *= max(Real(ctx, 1L), b.max_abs()) * a_neg_t.max_abs() * a_pos_t.max_abs() *
             static_cast<long>(basis.size());

  std::vector<std::string> warnings;
  StandardSubspace subspace{Matrix::identity(ctx, basis.size()), 0, 0};
  if (config.mode == BasisMode::kSplit) {
    subspace = standard_subspace(chi_t, a_neg_t, a_pos_t);
  } else {
    warnings.push_back("standard basis: chi is not an exact projector (max |chi^2 - chi| = " +
                       chi_defect.to_string(3) + ")");
  }
  GatedSpectrum gate = spectrum_gate(b, subspace, epsilon);

  // A gap within a few orders of the noise floor is formally valid but its
  // arcoth carries few correct digits.
  if (gate.min_gap < epsilon * pow10(ctx, ctx.guard_digits()))
    warnings.push_back("min_gap " + gate.min_gap.to_string(3) + " is within 10^" +
                       std::to_string(ctx.guard_digits()) + " of the noise floor " + epsilon.to_string(3) +
                       "; raise --digits");

  Matrix m_minus = element_frame(basis, build_M(gate, a_neg_t, a_pos_t, Sign::kMinus));
  std::optional<Matrix> m_plus;
  if (config.compute_plus) m_plus = element_frame(basis, build_M(gate, a_neg_t, a_pos_t, Sign::kPlus));

  ModularResult result{std::move(grid),
                       std::move(basis),
                       config,
                       gate.eigen.eigenvalues,
                       subspace.structural_dim,
                       subspace.structural_eigenvalue,
                       gate.min_gap,
                       epsilon,
                       chi_defect,
                       a_power.quadrature,
                       std::move(m_minus),
                       std::move(m_plus),
                       std::move(warnings)};
  return result;
}

std::vector<ScanEntry> mu_scan(const ModularResult& result, std::vector<Real> mus, const Real& sigma) {
  if (mus.empty()) throw std::invalid_argument("mu list is empty");
  std::sort(mus.begin(), mus.end(), [](const Real& a, const Real& b) { return a < b; });
  for (std::size_t i = 1; i < mus.size(); ++i)
    if (mus[i] == mus[i - 1]) throw std::invalid_argument("mu list contains duplicates");
  const PrecisionContext& ctx = result.grid.context();
  const bool massless = result.config.mass.to_double() <= result.config.massless_threshold;
  std::vector<ScanEntry> out;
  for (Real& mu : mus) {
    Real value = smear(result.m_minus, result.basis, result.grid, GaussianProbe{mu, sigma});
    auto ref = analytic_reference(ctx, result.config.region, massless, mu);
    out.push_back(ScanEntry{std::move(mu), std::move(value), std::move(ref)});
  }
  return out;
}

}  // namespace modham
