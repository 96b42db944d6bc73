#include <algorithm>

#include "modham/modular.hpp"

namespace modham {

std::vector<Real> probe_coefficients(const BasisSet& basis, const Grid& grid, const GaussianProbe& probe) {
  const PrecisionContext& ctx = grid.context();
  if (probe.sigma.sign() <= 0) throw std::invalid_argument("probe width sigma must be positive");
  const Real& h = grid.spacing();
  const Real amplitude = Real(ctx, 1L) / sqrt(sqrt(pi(ctx)) * probe.sigma);  // (pi sigma^2)^{-1/4}
  const Real scale = probe.sigma * sqrt(Real(ctx, 2L));
  // Per cell: I0 = int g, I1 = int (x - mu) g, closed form through erf.
  const int cells = grid.n_cells();
  std::vector<Real> i0(static_cast<std::size_t>(cells), Real(ctx)), i1(static_cast<std::size_t>(cells), Real(ctx));
  std::vector<Real> erf_at, gauss_at;
  for (int i = 0; i <= cells; ++i) {
    const Real u = (grid.node(i) - probe.mu) / scale;
    erf_at.push_back(erf(u));
    gauss_at.push_back(exp(-(u * u)));
  }
  const Real c0 = amplitude * scale * sqrt(pi(ctx)) / 2;
  const Real c1 = amplitude * probe.sigma * probe.sigma;
  for (int c = 0; c < cells; ++c) {
    const auto cs = static_cast<std::size_t>(c);
    i0[cs] = c0 * (erf_at[cs + 1] - erf_at[cs]);
    i1[cs] = c1 * (gauss_at[cs] - gauss_at[cs + 1]);
  }
  std::vector<Real> rhs;
  rhs.reserve(basis.size());
  for (const Element& e : basis.elements) {
    Real v(ctx);
    for (const auto& p : e.pieces) {
      const auto cs = static_cast<std::size_t>(p.cell);
      const Real& x0 = grid.node(p.cell);
      const Real& x1 = grid.node(p.cell + 1);
      if (p.left_value != 0) v += (x1 - probe.mu) * i0[cs] - i1[cs];
      if (p.right_value != 0) v += i1[cs] + (probe.mu - x0) * i0[cs];
    }
    rhs.push_back(v / h);
  }
  return solve_spd(basis.gram, rhs);
}

Real smear(const Matrix& m_hat, const BasisSet& basis, const Grid& grid, const GaussianProbe& probe) {
  if (!(abs(probe.mu) + probe.sigma * 6 < grid.half_width()))
    throw ProbeOutsideGrid("probe at mu = " + probe.mu.to_string(10) + " with sigma = " + probe.sigma.to_string(6) +
                           " reaches the box edge (|mu| + 6 sigma >= b)");
  if (m_hat.rows() != basis.size()) throw DimensionError("smear: matrix size does not match the basis");
  const std::vector<Real> c = probe_coefficients(basis, grid, probe);
  Real total(grid.context()), row(grid.context()), t(grid.context());
  for (std::size_t j = 0; j < c.size(); ++j) {
    mpfr_set_zero(row.raw(), 1);
    for (std::size_t k = 0; k < c.size(); ++k) {
      mpfr_mul(t.raw(), m_hat(j, k).raw(), c[k].raw(), MPFR_RNDN);
      mpfr_add(row.raw(), row.raw(), t.raw(), MPFR_RNDN);
    }
    mpfr_mul(t.raw(), row.raw(), c[j].raw(), MPFR_RNDN);
    mpfr_add(total.raw(), total.raw(), t.raw(), MPFR_RNDN);
  }
  return total;
}

KernelSamples kernel_on_grid(const Matrix& m_hat, const BasisSet& basis, const Grid& grid, const RegionSpec& region) {
  const PrecisionContext& ctx = grid.context();
  const Matrix& l_inv = basis.gram_cholesky_inverse;
  // G^{-1} M G^{-1} = L^{-T} (L^{-1} M L^{-T}) L^{-1}
  const Matrix inner = congruence(l_inv, m_hat);
  Matrix c = multiply_transposed_left(l_inv, multiply(inner, l_inv));
  c.symmetrize();

  const std::size_t nodes = static_cast<std::size_t>(grid.n_cells()) - 1;
  std::vector<std::vector<std::pair<std::size_t, bool>>> at_node(nodes);
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const Element& e = basis.elements[j];
    at_node[static_cast<std::size_t>(e.node) - 1].push_back({j, e.shape != Element::Shape::kHat});
  }
  KernelSamples out{{}, Matrix(ctx, nodes, nodes), Real(ctx), Real(ctx), Real(ctx)};
  for (std::size_t i = 0; i < nodes; ++i) out.nodes.push_back(grid.node(static_cast<int>(i) + 1));
  const Real centre = region.kind == RegionSpec::Kind::kWedge ? region.left : region.center_radius().first;
  const Real two_h = grid.spacing() * 2;
  const Real slack = pow10(ctx, -ctx.decimal_digits() / 2) * grid.spacing();
  for (std::size_t i = 0; i < nodes; ++i)
    for (std::size_t l = 0; l < nodes; ++l) {
      Real v(ctx);
      for (const auto& [j, half_j] : at_node[i])
        for (const auto& [k, half_k] : at_node[l]) {
          Real term = c(j, k);
          if (half_j) term /= 2;
          if (half_k) term /= 2;
          v += term;
        }
      const Real mass = abs(v);
      const long gap = static_cast<long>(i > l ? i - l : l - i);
      if (gap <= 2) {
        out.band_mass += mass;
      } else {
        out.off_band_mass += mass;
        if (abs(out.nodes[i] + out.nodes[l] - centre * 2) <= two_h + slack) out.antidiagonal_mass += mass;
      }
      out.values.raw_at(i, l) = std::move(v);
    }
  out.values.symmetrize();
  return out;
}

std::optional<Real> analytic_reference(const PrecisionContext& ctx, const RegionSpec& region, bool massless_limit,
                                       const Real& mu) {
  if (!region.contains(mu)) return std::nullopt;
  Real value(ctx);
  if (region.kind == RegionSpec::Kind::kWedge) {
    value = pi(ctx) * 2 * (mu - region.left);
  } else {
    if (!massless_limit) return std::nullopt;
    const auto [c, r] = region.center_radius();
    const Real d = mu - c;
    value = pi(ctx) * (r * r - d * d) / r;
  }
  if (region.complement) value = -value;
  return value;
}

}  // namespace modham
