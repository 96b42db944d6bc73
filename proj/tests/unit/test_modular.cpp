#include "doctest.h"
#include "helpers.hpp"
#include "modham/modular.hpp"

using namespace modham;
using testing::check_close;
using testing::from_rows;

namespace {

PipelineConfig small_config(const PrecisionContext& ctx, const RegionSpec& region, int cells, long b) {
  PipelineConfig c{region, Real(ctx, 1L), cells, Real(ctx, b), BasisMode::kSplit, APowerOptions{}};
  return c;
}

}  // namespace

TEST_CASE("build_B boundary cases") {
  PrecisionContext ctx(50);
  const Matrix id = Matrix::identity(ctx, 3);
  const Matrix a = Matrix::diagonal(ctx, {Real(ctx, 2L), Real(ctx, 3L), Real(ctx, 5L)});
  CHECK(max_abs_difference(build_B(id, a), id) <= pow10(ctx, -45));
  CHECK(max_abs_difference(build_B(Matrix(ctx, 3, 3), a), Matrix::identity(ctx, 3) *= Real(ctx, -1L)) <=
        pow10(ctx, -45));
}

TEST_CASE("spectrum gate") {
  PrecisionContext ctx(50);
  const Real eps = pow10(ctx, -40);
  try {
    spectrum_gate(Matrix::identity(ctx, 2), eps);
    FAIL("B = 1 passed the gate");
  } catch (const ForbiddenSpectrum& e) {
    check_close(e.lambda(), Real(ctx, 1L), eps);
    CHECK(e.gap().is_zero());
  }
  const GatedSpectrum g = spectrum_gate(Matrix::diagonal(ctx, {Real(ctx, 2L), Real(ctx, -3L)}), eps);
  check_close(g.min_gap, Real(ctx, 1L), eps);
  CHECK_THROWS_AS(spectrum_gate(from_rows(ctx, {{0, 1}, {1, 0}}), eps), ForbiddenSpectrum);
}

TEST_CASE("small interval pipeline: spectrum outside the band, symmetric M") {
  PrecisionContext ctx(150);
  const RegionSpec region = RegionSpec::interval(Real(ctx, -1L), Real(ctx, 1L));
  const ModularResult r = run_pipeline(ctx, small_config(ctx, region, 16, 2));
  CHECK(r.min_gap > r.epsilon);
  for (const Real& l : r.b_eigenvalues) CHECK(abs(l) > Real(ctx, 1L));
  CHECK(r.m_minus.asymmetry().is_zero());
  REQUIRE(r.m_plus.has_value());
  CHECK(r.m_plus->asymmetry().is_zero());
  CHECK(r.chi_idempotence <= pow10(ctx, -120));

  // reflection x -> -x maps element j to element n-1-j
  const std::size_t n = r.basis.size();
  Real worst(ctx);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) worst = max(worst, abs(r.m_minus(j, k) - r.m_minus(n - 1 - j, n - 1 - k)));
  CHECK(worst <= pow10(ctx, -100) * r.m_minus.max_abs());
}

TEST_CASE("the complement flips the sign of M") {
  PrecisionContext ctx(80);
  const RegionSpec region = RegionSpec::interval(Real(ctx, -1L), Real(ctx, 1L));
  const ModularResult inside = run_pipeline(ctx, small_config(ctx, region, 16, 4));
  ModularResult outside = run_pipeline(ctx, small_config(ctx, region.complemented(), 16, 4));
  CHECK(inside.structural_eigenvalue == -outside.structural_eigenvalue);
  const Real scale = inside.m_minus.max_abs();
  CHECK(max_abs_difference(inside.m_minus, outside.m_minus *= Real(ctx, -1L)) <= pow10(ctx, -50) * scale);
}

TEST_CASE("standard basis runs are flagged") {
  PrecisionContext ctx(60);
  PipelineConfig c = small_config(ctx, RegionSpec::wedge(Real(ctx, 0L)), 8, 2);
  c.mode = BasisMode::kStandard;
  try {
    const ModularResult r = run_pipeline(ctx, c);
    REQUIRE(!r.warnings.empty());
    CHECK(r.warnings.front().find("not an exact projector") != std::string::npos);
  } catch (const ForbiddenSpectrum&) {
    CHECK(true);
  }
}

TEST_CASE("region covering nothing is a forbidden spectrum") {
  PrecisionContext ctx(50);
  CHECK_THROWS_AS(run_pipeline(ctx, small_config(ctx, RegionSpec::wedge(Real(ctx, 2L)), 8, 2)), ForbiddenSpectrum);
}

TEST_CASE("smear of known bilinear forms") {
  PrecisionContext ctx(50);
  Grid grid(ctx, 160, Real(ctx, 4L));
  const BasisSet basis = build_basis(grid, RegionSpec::wedge(Real(ctx, 0L)), BasisMode::kStandard);
  const GaussianProbe probe{Real::ratio(ctx, 3, 10), Real::ratio(ctx, 3, 10)};
  check_close(smear(basis.gram, basis, grid, probe), Real(ctx, 1L), Real(ctx, 1e-4));

  Matrix mx(ctx, basis.size(), basis.size());
  const Real& h = grid.spacing();
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const Real& xj = grid.node(basis.elements[j].node);
    mx(j, j) = xj * h * 2 / 3;
    if (j + 1 < basis.size()) {
      mx(j, j + 1) = (xj + grid.node(basis.elements[j + 1].node)) * h / 12;
      mx(j + 1, j) = mx(j, j + 1);
    }
  }
  mx.symmetrize();
  const GaussianProbe narrow{Real::ratio(ctx, 3, 10), Real::ratio(ctx, 1, 10)};
  check_close(smear(mx, basis, grid, narrow), Real::ratio(ctx, 3, 10), Real(ctx, 1e-3));

  CHECK_THROWS_AS(smear(basis.gram, basis, grid, GaussianProbe{Real(ctx, 3L), Real::ratio(ctx, 1, 5)}),
                  ProbeOutsideGrid);
  CHECK_THROWS_AS(probe_coefficients(basis, grid, GaussianProbe{Real(ctx, 0L), Real(ctx, 0L)}), std::invalid_argument);
}

TEST_CASE("kernel_on_grid") {
  PrecisionContext ctx(50);
  Grid grid(ctx, 8, Real(ctx, 2L));
  const RegionSpec region = RegionSpec::wedge(Real(ctx, 0L));
  const BasisSet basis = build_basis(grid, RegionSpec::wedge(Real(ctx, 0L)), BasisMode::kStandard);
  const KernelSamples zero = kernel_on_grid(Matrix(ctx, basis.size(), basis.size()), basis, grid, region);
  CHECK(zero.values.max_abs().is_zero());
  CHECK(zero.band_mass.is_zero());

  // M~ = 1 is M^ = G; at the nodes the hats are unit vectors, so the kernel is G^{-1}
  const KernelSamples rk = kernel_on_grid(basis.gram, basis, grid, region);
  CHECK(max_abs_difference(rk.values, invert(basis.gram)) <= pow10(ctx, -40));

  const BasisSet split = build_basis(grid, region, BasisMode::kSplit);
  const KernelSamples rs = kernel_on_grid(split.gram, split, grid, region);
  CHECK(rs.nodes.size() == 7);
  CHECK(rs.values.asymmetry().is_zero());
}

TEST_CASE("analytic references") {
  PrecisionContext ctx(40);
  const Real tol = pow10(ctx, -35);
  const RegionSpec wedge = RegionSpec::wedge(Real(ctx, 0L));
  check_close(*analytic_reference(ctx, wedge, false, Real::ratio(ctx, 1, 2)), pi(ctx), tol);
  CHECK(!analytic_reference(ctx, wedge, false, Real(ctx, -1L)));
  check_close(*analytic_reference(ctx, wedge.complemented(), false, Real(ctx, -1L)), pi(ctx) * 2, tol);

  const RegionSpec interval = RegionSpec::interval(Real(ctx, -1L), Real(ctx, 1L));
  check_close(*analytic_reference(ctx, interval, true, Real(ctx, 0L)), pi(ctx), tol);
  check_close(*analytic_reference(ctx, interval, true, Real::ratio(ctx, 1, 2)), pi(ctx) * 3 / 4, tol);
  CHECK(!analytic_reference(ctx, interval, false, Real(ctx, 0L)));
  CHECK(!analytic_reference(ctx, interval, true, Real(ctx, 2L)));
}

TEST_CASE("mu_scan ordering and validation") {
  PrecisionContext ctx(60);
  const RegionSpec wedge = RegionSpec::wedge(Real(ctx, 0L));
  const ModularResult r = run_pipeline(ctx, small_config(ctx, wedge, 16, 4));
  const Real sigma = Real::ratio(ctx, 1, 5);
  const auto scan = mu_scan(r, {Real(ctx, 1L), Real::ratio(ctx, -1, 2), Real::ratio(ctx, 1, 2)}, sigma);
  REQUIRE(scan.size() == 3);
  CHECK(scan[0].mu < scan[1].mu);
  CHECK(scan[1].mu < scan[2].mu);
  CHECK(!scan[0].reference);
  CHECK(scan[2].reference);
  CHECK(scan[2].value > scan[1].value);
  CHECK_THROWS_AS(mu_scan(r, {}, sigma), std::invalid_argument);
  CHECK_THROWS_AS(mu_scan(r, {Real(ctx, 1L), Real(ctx, 1L)}, sigma), std::invalid_argument);
}
