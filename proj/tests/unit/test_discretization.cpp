#include "doctest.h"
#include "helpers.hpp"
#include "modham/discretization.hpp"
#include "modham/linalg.hpp"
#include "oracles.hpp"

using namespace modham;
using testing::check_close;

namespace {

Real quarter(const PrecisionContext& ctx) { return Real::ratio(ctx, -1, 4); }

}  // namespace

TEST_CASE("grid geometry and validation") {
  PrecisionContext ctx(50);
  Grid grid(ctx, 8, Real(ctx, 2L));
  check_close(grid.spacing(), Real::ratio(ctx, 1, 2), pow10(ctx, -48));
  CHECK(grid.node_index(Real(ctx, 0L)) == 4);
  CHECK(grid.node_index(Real::ratio(ctx, -3, 2)) == 1);
  CHECK_THROWS_AS(grid.node_index(Real::ratio(ctx, 3, 10)), RegionNotOnGrid);
  CHECK_THROWS_AS(Grid(ctx, 3, Real(ctx, 2L)), GeometryError);
  CHECK_THROWS_AS(build_basis(grid, RegionSpec::interval(Real(ctx, 0L), Real::ratio(ctx, 1, 2)), BasisMode::kSplit),
                  GeometryError);
  CHECK_THROWS_AS(build_basis(grid, RegionSpec::wedge(Real::ratio(ctx, 1, 3)), BasisMode::kSplit), RegionNotOnGrid);
  CHECK_THROWS_AS(RegionSpec::interval(Real(ctx, 1L), Real(ctx, -1L)), GeometryError);
}

TEST_CASE("gram matrix closed forms") {
  PrecisionContext ctx(60);
  Grid grid(ctx, 8, Real(ctx, 2L));
  const RegionSpec wedge = RegionSpec::wedge(Real(ctx, 0L));
  const BasisSet standard = build_basis(grid, wedge, BasisMode::kStandard);
  CHECK(standard.size() == 7);
  const Real tol = pow10(ctx, -58);
  check_close(standard.gram(3, 3), Real::ratio(ctx, 1, 3), tol);
  check_close(standard.gram(3, 4), Real::ratio(ctx, 1, 12), tol);
  CHECK(standard.gram(3, 5).is_zero());

  const BasisSet split = build_basis(grid, wedge, BasisMode::kSplit);
  CHECK(split.size() == 8);
  int halves = 0;
  for (std::size_t j = 0; j < split.size(); ++j)
    if (split.elements[j].shape != Element::Shape::kHat) {
      ++halves;
      check_close(split.gram(j, j), Real::ratio(ctx, 1, 6), tol);
    }
  CHECK(halves == 2);
  const BasisSet interval =
      build_basis(grid, RegionSpec::interval(Real(ctx, -1L), Real(ctx, 1L)), BasisMode::kSplit);
  CHECK(interval.size() == 9);
}

TEST_CASE("hat integrals and Fourier transforms") {
  PrecisionContext ctx(50);
  Grid grid(ctx, 8, Real(ctx, 2L));
  const BasisSet basis = build_basis(grid, RegionSpec::wedge(Real(ctx, 0L)), BasisMode::kStandard);
  const auto [re, im] = basis.elements[2].fourier(grid, Real(ctx, 0L));
  check_close(re, grid.spacing(), pow10(ctx, -48));
  check_close(im, Real(ctx), pow10(ctx, -48));
  check_close(basis.elements[2].evaluate(grid, grid.node(3)), Real(ctx, 1L), pow10(ctx, -48));
}

TEST_CASE("cholesky of a 10-element gram matrix") {
  PrecisionContext ctx(100);
  Grid grid(ctx, 11, Real::ratio(ctx, 11, 2));
  const BasisSet basis = build_basis(grid, RegionSpec::wedge(Real::ratio(ctx, 1, 2)), BasisMode::kStandard);
  REQUIRE(basis.size() == 10);
  const Matrix& l = basis.gram_cholesky;
  CHECK(max_abs_difference(multiply(l, l.transpose()), basis.gram) <= pow10(ctx, -90));
  CHECK(max_abs_difference(orthonormal_frame(basis, basis.gram), Matrix::identity(ctx, 10)) <= pow10(ctx, -80));
  CHECK(orthonormal_frame(basis, Matrix(ctx, 10, 10)).max_abs().is_zero());
}

TEST_CASE("chi matrix") {
  PrecisionContext ctx(60);
  Grid grid(ctx, 8, Real(ctx, 2L));
  const Real tol = pow10(ctx, -55);
  const BasisSet standard = build_basis(grid, RegionSpec::wedge(Real(ctx, 0L)), BasisMode::kStandard);
  CHECK(max_abs_difference(chi_matrix(standard, grid, RegionSpec::wedge(Real(ctx, -2L))), standard.gram) <= tol);
  CHECK(chi_matrix(standard, grid, RegionSpec::wedge(Real(ctx, 2L))).max_abs() <= tol);
  // hat at node 4 (x = 0) straddles the wedge edge
  check_close(chi_matrix(standard, grid, RegionSpec::wedge(Real(ctx, 0L)))(3, 3), Real::ratio(ctx, 1, 6), tol);

  const RegionSpec interval = RegionSpec::interval(Real(ctx, -1L), Real(ctx, 1L));
  const BasisSet split = build_basis(grid, interval, BasisMode::kSplit);
  const Matrix p = orthonormal_frame(split, chi_matrix(split, grid, interval));
  CHECK(max_abs_difference(multiply(p, p), p) <= pow10(ctx, -40));
  CHECK(p.asymmetry().is_zero());
  const BasisSet std_interval = build_basis(grid, interval, BasisMode::kStandard);
  const Matrix q = orthonormal_frame(std_interval, chi_matrix(std_interval, grid, interval));
  CHECK(max_abs_difference(multiply(q, q), q) > Real(ctx, 1e-3));
}

TEST_CASE("A^{-1/4}: structure") {
  PrecisionContext ctx(60);
  Grid grid(ctx, 16, Real(ctx, 4L));
  const BasisSet basis = build_basis(grid, RegionSpec::wedge(Real(ctx, 0L)), BasisMode::kStandard);
  const APowerResult a = a_power_matrix(basis, grid, Real(ctx, 1L), quarter(ctx));
  check_close(a.matrix(1, 3), a.matrix(2, 4), pow10(ctx, -50));
  CHECK(a.matrix.asymmetry().is_zero());
  const SymEigen eig = sym_eigen(a.matrix);
  CHECK(eig.eigenvalues.front().sign() > 0);
  CHECK_THROWS_AS(a_power_matrix(basis, grid, Real(ctx, 0L), quarter(ctx)), DomainError);
  CHECK_THROWS_AS(a_power_matrix(basis, grid, Real(ctx, 1L), Real::ratio(ctx, 1, 4)), DomainError);
}

TEST_CASE("A^{-1/4}: large mass approaches m^{-1/2} times the gram matrix") {
  PrecisionContext ctx(50);
  Grid grid(ctx, 16, Real(ctx, 4L));
  const BasisSet basis = build_basis(grid, RegionSpec::wedge(Real(ctx, 0L)), BasisMode::kStandard);
  Real previous(ctx, 1L);
  for (long m : {100L, 1000L}) {
    Matrix a = a_power_matrix(basis, grid, Real(ctx, m), quarter(ctx)).matrix;
    a *= sqrt(Real(ctx, m));
    const Real rel = max_abs_difference(a, basis.gram) / basis.gram.max_abs();
    CHECK(rel < previous);
    previous = rel;
  }
  CHECK(previous < Real(ctx, 1e-4));
}

TEST_CASE("A^{-1/4}: momentum space agrees with the position-space Bessel kernel") {
  PrecisionContext ctx(50);
  Grid grid(ctx, 16, Real(ctx, 4L));
  const BasisSet basis = build_basis(grid, RegionSpec::wedge(Real(ctx, 0L)), BasisMode::kStandard);
  const Matrix a = a_power_matrix(basis, grid, Real(ctx, 1L), quarter(ctx)).matrix;
  for (int offset = 0; offset < 6; ++offset) {
    const Real reference(ctx, oracle::bessel_kernel_entry("1", "0.5", offset, 55));
    check_close(a(4, 4 + static_cast<std::size_t>(offset)), reference, pow10(ctx, -40));
  }
}

TEST_CASE("A^{-1/4}: tighter quadrature moves entries by less than the error estimate") {
  PrecisionContext ctx(50);
  Grid grid(ctx, 12, Real(ctx, 3L));
  const BasisSet basis = build_basis(grid, RegionSpec::wedge(Real(ctx, 0L)), BasisMode::kStandard);
  APowerOptions loose;
  loose.tolerance_scale = 1e20;
  APowerOptions tight;
  tight.tolerance_scale = 1e-5;
  const APowerResult a = a_power_matrix(basis, grid, Real::ratio(ctx, 1, 2), quarter(ctx), loose);
  const APowerResult b = a_power_matrix(basis, grid, Real::ratio(ctx, 1, 2), quarter(ctx), tight);
  CHECK(b.quadrature.level >= a.quadrature.level);
  INFO("estimate " << a.quadrature.error_estimate.to_string(3));
  CHECK(max_abs_difference(a.matrix, b.matrix) <= a.quadrature.error_estimate);
}

TEST_CASE("inverse of the discretized A^{-1/4}") {
  PrecisionContext ctx(100);
  Grid grid(ctx, 16, Real(ctx, 2L));
  const RegionSpec region = RegionSpec::interval(Real(ctx, -1L), Real(ctx, 1L));
  const BasisSet basis = build_basis(grid, region, BasisMode::kSplit);
  const Matrix a = orthonormal_frame(basis, a_power_matrix(basis, grid, Real(ctx, 1L), quarter(ctx)).matrix);
  const Matrix inv = invert(a);
  CHECK(max_abs_difference(multiply(a, inv), Matrix::identity(ctx, basis.size())) <= pow10(ctx, -80));
}
