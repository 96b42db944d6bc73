#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "modham/matrix.hpp"
#include "modham/precision.hpp"

namespace modham {

/// Invalid grid or region geometry.
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class RegionNotOnGrid : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

/// Time-zero base of the localization region.
///
/// A wedge is the half-line x > edge; an interval is (left, right). With
/// `complement` set the indicator is 1 - chi of the underlying region.
struct RegionSpec {
  enum class Kind { kWedge, kInterval };

  Kind kind;
  Real left;                  ///< wedge edge, or interval left end
  std::optional<Real> right;  ///< interval right end
  bool complement = false;

  static RegionSpec wedge(Real edge);
  static RegionSpec interval(Real left, Real right);
  RegionSpec complemented() const;

  /// Indicator at x (boundary points count as outside).
  bool contains(const Real& x) const;
  /// Region boundaries inside the real line.
  std::vector<Real> boundaries() const;
  /// Centre and half-width of an interval (throws for wedges).
  std::pair<Real, Real> center_radius() const;
  std::string describe() const;
};

/// Uniform grid on [-b, b] with spacing h = 2b / n_cells.
class Grid {
 public:
  Grid(const PrecisionContext& ctx, int n_cells, const Real& half_width);

  const PrecisionContext& context() const { return ctx_; }
  int n_cells() const { return n_cells_; }
  const Real& half_width() const { return half_width_; }
  const Real& spacing() const { return spacing_; }
  const std::vector<Real>& nodes() const { return nodes_; }
  const Real& node(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }

  /// Index of the node equal to x (within 10^{-digits} h); throws RegionNotOnGrid.
  int node_index(const Real& x) const;

 private:
  PrecisionContext ctx_;
  int n_cells_;
  Real half_width_;
  Real spacing_;
  std::vector<Real> nodes_;
};

enum class BasisMode { kStandard, kSplit };

std::string to_string(BasisMode mode);
BasisMode parse_basis_mode(const std::string& text);

/// Piecewise-linear element on the grid. Every element is linear on whole
/// grid cells; pieces store the cell index and the element's values (0 or 1)
/// at the cell's left and right node.
struct Element {
  enum class Shape { kHat, kLeftHalf, kRightHalf };
  struct Piece {
    int cell;
    int left_value;
    int right_value;
  };

  Shape shape;
  int node;  ///< grid node where the element equals 1
  std::vector<Piece> pieces;

  /// Value at x. At a split node each half-hat takes the value 1/2 so that
  /// the two halves together reproduce the continuous hat.
  Real evaluate(const Grid& grid, const Real& x) const;
  /// Closed-form Fourier transform, integral of e(x) exp(-i p x) dx, as (re, im).
  std::pair<Real, Real> fourier(const Grid& grid, const Real& p) const;
  /// Support [x_lo, x_hi].
  std::pair<Real, Real> support(const Grid& grid) const;
};

struct BasisSet {
  BasisMode mode;
  std::vector<Element> elements;
  std::vector<int> region_nodes;  ///< grid nodes on region boundaries
  Matrix gram;
  Matrix gram_cholesky;          ///< L with G = L L^T
  Matrix gram_cholesky_inverse;  ///< L^{-1}

  std::size_t size() const { return elements.size(); }
};

/// Validates the geometry and builds the basis with its exact Gram matrix.
///
/// Endpoint hats at +-b are dropped. In split mode each hat centred on a
/// region boundary is replaced by its two half-hats, so every element lies
/// entirely inside or entirely outside the region. Throws GeometryError for
/// n_cells < 4, an interval narrower than 2h, or a region outside the box,
/// and RegionNotOnGrid when a boundary misses the nodes.
BasisSet build_basis(const Grid& grid, const RegionSpec& region, BasisMode mode);

/// X_jk = integral of chi e_j e_k, by exact per-cell integration.
Matrix chi_matrix(const BasisSet& basis, const Grid& grid, const RegionSpec& region);

struct QuadratureReport {
  Real error_estimate;
  int level = 0;
  std::size_t evaluations = 0;
};

struct APowerResult {
  Matrix matrix;
  QuadratureReport quadrature;
};

struct APowerOptions {
  int max_level = 12;
  /// Multiplies the convergence tolerance (values > 1 loosen it). Used by
  /// fault-injection tests.
  double tolerance_scale = 1.0;
};

/// Bilinear-form matrix (A^s)_jk = <e_j, (-d^2/dx^2 + m^2)^s e_k> for s < 0.
///
/// The momentum integral over (p^2+m^2)^s e_j^(p) conj(e_k^(p)) dp/(2 pi) is
/// evaluated through the Laplace representation
///   (p^2+m^2)^s = Gamma(-s)^{-1} int_0^inf t^{-s-1} e^{-t(p^2+m^2)} dt,
/// which turns the p-integral into closed-form heat-kernel overlaps of the
/// piecewise-linear cells (erfc and Gaussian moments). The remaining
/// t-integral is smooth and is done once per cell offset by exp-sinh
/// quadrature with an analytic truncation window, to the context precision.
APowerResult a_power_matrix(const BasisSet& basis, const Grid& grid, const Real& mass, const Real& exponent,
                            APowerOptions options = {});

/// L^{-1} X L^{-T} for a bilinear-form matrix X in the element basis.
Matrix orthonormal_frame(const BasisSet& basis, const Matrix& x);

/// Inverse map: L Y L^T, from the orthonormal frame back to the element basis.
Matrix element_frame(const BasisSet& basis, const Matrix& y);

}  // namespace modham
