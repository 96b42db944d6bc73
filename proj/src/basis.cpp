#include <algorithm>
#include <cmath>

#include "modham/discretization.hpp"
#include "modham/linalg.hpp"

namespace modham {

RegionSpec RegionSpec::wedge(Real edge) { return RegionSpec{Kind::kWedge, std::move(edge), std::nullopt, false}; }

RegionSpec RegionSpec::interval(Real left, Real right) {
  if (!(left < right)) throw GeometryError("interval requires left < right");
  return RegionSpec{Kind::kInterval, std::move(left), std::move(right), false};
}

RegionSpec RegionSpec::complemented() const {
  RegionSpec r = *this;
  r.complement = !complement;
  return r;
}

bool RegionSpec::contains(const Real& x) const {
  const bool inside = kind == Kind::kWedge ? (x > left) : (x > left && x < *right);
  return inside != complement;
}

std::vector<Real> RegionSpec::boundaries() const {
  std::vector<Real> b{left};
  if (right) b.push_back(*right);
  return b;
}

std::pair<Real, Real> RegionSpec::center_radius() const {
  if (kind != Kind::kInterval) throw GeometryError("center_radius is defined for intervals only");
  return {(left + *right) / 2, (*right - left) / 2};
}

std::string RegionSpec::describe() const {
  std::string s = kind == Kind::kWedge ? "wedge(edge=" + left.to_string(17) + ")"
                                       : "interval(" + left.to_string(17) + "," + right->to_string(17) + ")";
  return complement ? "complement-of-" + s : s;
}

std::string to_string(BasisMode mode) { return mode == BasisMode::kSplit ? "split" : "standard"; }

BasisMode parse_basis_mode(const std::string& text) {
  if (text == "split") return BasisMode::kSplit;
  if (text == "standard") return BasisMode::kStandard;
  throw std::invalid_argument("unknown basis mode '" + text + "' (expected standard|split)");
}

Grid::Grid(const PrecisionContext& ctx, int n_cells, const Real& half_width)
    : ctx_(ctx), n_cells_(n_cells), half_width_(half_width.rounded(ctx.bits())), spacing_(ctx) {
  if (n_cells < 4) throw GeometryError("n_cells must be at least 4 (got " + std::to_string(n_cells) + ")");
  if (half_width.sign() <= 0) throw GeometryError("half width b must be positive");
  spacing_ = half_width_ * 2 / static_cast<long>(n_cells);
  nodes_.reserve(static_cast<std::size_t>(n_cells) + 1);
  for (int i = 0; i <= n_cells; ++i) {
    // -b + 2b i / n, formed as b (2i - n) / n so that the grid is exactly
    // symmetric about 0.
    Real x = half_width_ * static_cast<long>(2 * i - n_cells);
    x /= static_cast<long>(n_cells);
    nodes_.push_back(std::move(x));
  }
}

int Grid::node_index(const Real& x) const {
  Real k = (x + half_width_) / spacing_;
  Real nearest(ctx_);
  mpfr_round(nearest.raw(), k.raw());
  Real tol = pow10(ctx_, -ctx_.decimal_digits());
  if (abs(k - nearest) > tol || nearest < 0L || nearest > static_cast<long>(n_cells_))
    throw RegionNotOnGrid("point " + x.to_string(20) + " is not a grid node (h = " + spacing_.to_string(20) + ")");
  return static_cast<int>(nearest.to_long());
}

Real Element::evaluate(const Grid& grid, const Real& x) const {
  const PrecisionContext& ctx = grid.context();
  Real xi = (x + grid.half_width()) / grid.spacing();
  Real cell_r(ctx);
  mpfr_floor(cell_r.raw(), xi.raw());
  Real frac = xi - cell_r;
  const int cell = static_cast<int>(cell_r.to_long());
  const Real tol = pow10(ctx, -ctx.decimal_digits());
  int at_node = -1;
  if (frac <= tol) at_node = cell;
  if (Real(ctx, 1L) - frac <= tol) at_node = cell + 1;
  if (at_node >= 0) {
    if (at_node != node) return Real(ctx);
    return shape == Shape::kHat ? Real(ctx, 1L) : Real::ratio(ctx, 1, 2);
  }
  for (const Piece& p : pieces) {
    if (p.cell != cell) continue;
    Real v(ctx, static_cast<long>(p.left_value));
    v += frac * static_cast<long>(p.right_value - p.left_value);
    return v;
  }
  return Real(ctx);
}

std::pair<Real, Real> Element::fourier(const Grid& grid, const Real& p) const {
  const PrecisionContext& ctx = grid.context();
  const Real& h = grid.spacing();
  Real re(ctx), im(ctx);
  if (p.is_zero()) {
    for (const Piece& pc : pieces) re += h * static_cast<long>(pc.left_value + pc.right_value) / 2;
    return {re, im};
  }
  // Per piece on [x0, x0+h] with value v0 + (v1-v0) y/h:
  //   I0 = int_0^h e^{-ipy} dy, I1 = int_0^h y e^{-ipy} dy,
  //   contribution e^{-ip x0} (v0 I0 + (v1-v0)/h I1).
  const Real ph = p * h;
  const Real c = cos(ph), s = sin(ph);
  const Real p2 = p * p;
  // I0 = (sin(ph) + i (cos(ph) - 1)) / p
  const Real i0_re = s / p, i0_im = (c - Real(ctx, 1L)) / p;
  // I1 = i h e^{-iph}/p + (e^{-iph} - 1)/p^2
  const Real i1_re = h * s / p + (c - Real(ctx, 1L)) / p2;
  const Real i1_im = h * c / p - s / p2;
  for (const Piece& pc : pieces) {
    const Real x0 = grid.node(pc.cell);
    const Real slope = Real(ctx, static_cast<long>(pc.right_value - pc.left_value)) / h;
    const Real v0(ctx, static_cast<long>(pc.left_value));
    const Real a_re = v0 * i0_re + slope * i1_re;
    const Real a_im = v0 * i0_im + slope * i1_im;
    const Real px = p * x0;
    const Real e_re = cos(px), e_im = -sin(px);
    re += e_re * a_re - e_im * a_im;
    im += e_re * a_im + e_im * a_re;
  }
  return {re, im};
}

std::pair<Real, Real> Element::support(const Grid& grid) const {
  int lo = pieces.front().cell, hi = pieces.front().cell;
  for (const Piece& p : pieces) {
    lo = std::min(lo, p.cell);
    hi = std::max(hi, p.cell);
  }
  return {grid.node(lo), grid.node(hi + 1)};
}

namespace {

// 6/h times the overlap integral of two linear pieces on the same cell.
long piece_overlap_sixths(const Element::Piece& a, const Element::Piece& b) {
  return 2L * a.left_value * b.left_value + a.left_value * b.right_value + a.right_value * b.left_value +
         2L * a.right_value * b.right_value;
}

std::vector<int> locate_region(const Grid& grid, const RegionSpec& region) {
  const Real& b = grid.half_width();
  std::vector<int> nodes;
  if (region.kind == RegionSpec::Kind::kWedge) {
    if (region.left < -b || region.left > b)
      throw GeometryError("wedge edge " + region.left.to_string(17) + " lies outside [-b, b]");
    const int idx = grid.node_index(region.left);
    if (idx > 0 && idx < grid.n_cells()) nodes.push_back(idx);
    return nodes;
  }
  if (!(region.left > -b) || !(*region.right < b))
    throw GeometryError("interval " + region.describe() + " must lie strictly inside (-b, b)");
  const int lo = grid.node_index(region.left);
  const int hi = grid.node_index(*region.right);
  if (hi - lo < 2) throw GeometryError("interval narrower than 2h is not resolved by the grid");
  nodes.push_back(lo);
  nodes.push_back(hi);
  return nodes;
}

bool cell_inside(const Grid& grid, const RegionSpec& region, int cell) {
  Real mid = (grid.node(cell) + grid.node(cell + 1)) / 2;
  return region.contains(mid);
}

}  // namespace

BasisSet build_basis(const Grid& grid, const RegionSpec& region, BasisMode mode) {
  const PrecisionContext& ctx = grid.context();
  std::vector<int> region_nodes = locate_region(grid, region);
  std::vector<Element> elements;
  for (int i = 1; i < grid.n_cells(); ++i) {
    const bool split =
        mode == BasisMode::kSplit && std::find(region_nodes.begin(), region_nodes.end(), i) != region_nodes.end();
    if (split) {
      elements.push_back(Element{Element::Shape::kLeftHalf, i, {{i - 1, 0, 1}}});
      elements.push_back(Element{Element::Shape::kRightHalf, i, {{i, 1, 0}}});
    } else {
      elements.push_back(Element{Element::Shape::kHat, i, {{i - 1, 0, 1}, {i, 1, 0}}});
    }
  }
  const std::size_t n = elements.size();
  Matrix gram(ctx, n, n);
  const Real h_over_6 = grid.spacing() / 6;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      long sixths = 0;
      for (const auto& pa : elements[j].pieces)
        for (const auto& pb : elements[k].pieces)
          if (pa.cell == pb.cell) sixths += piece_overlap_sixths(pa, pb);
      if (sixths != 0) gram.raw_at(j, k) = h_over_6 * sixths;
    }
  gram.symmetrize();
  Matrix l = cholesky(gram);
  Matrix l_inv = invert_lower(l);
  return BasisSet{mode, std::move(elements), std::move(region_nodes), std::move(gram), std::move(l), std::move(l_inv)};
}

Matrix chi_matrix(const BasisSet& basis, const Grid& grid, const RegionSpec& region) {
  const PrecisionContext& ctx = grid.context();
  const std::size_t n = basis.size();
  std::vector<bool> inside(static_cast<std::size_t>(grid.n_cells()));
  for (int c = 0; c < grid.n_cells(); ++c) inside[static_cast<std::size_t>(c)] = cell_inside(grid, region, c);
  Matrix x(ctx, n, n);
  const Real h_over_6 = grid.spacing() / 6;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      long sixths = 0;
      for (const auto& pa : basis.elements[j].pieces)
        for (const auto& pb : basis.elements[k].pieces)
          if (pa.cell == pb.cell && inside[static_cast<std::size_t>(pa.cell)]) sixths += piece_overlap_sixths(pa, pb);
      if (sixths != 0) x.raw_at(j, k) = h_over_6 * sixths;
    }
  x.symmetrize();
  return x;
}

Matrix orthonormal_frame(const BasisSet& basis, const Matrix& x) {
  if (x.rows() != basis.size() || x.cols() != basis.size())
    throw DimensionError("orthonormal_frame: matrix size does not match the basis");
  return congruence(basis.gram_cholesky_inverse, x);
}

Matrix element_frame(const BasisSet& basis, const Matrix& y) {
  if (y.rows() != basis.size() || y.cols() != basis.size())
    throw DimensionError("element_frame: matrix size does not match the basis");
  Matrix out = multiply(multiply(basis.gram_cholesky, y), basis.gram_cholesky.transpose());
  if (y.symmetric() || y.asymmetry().is_zero()) out.symmetrize();
  return out;
}

}  // namespace modham
