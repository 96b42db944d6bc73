#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "modham/discretization.hpp"
#include "modham/linalg.hpp"

namespace modham {

/// An eigenvalue of B lies in the closed band [-1-eps, 1+eps].
class ForbiddenSpectrum : public std::runtime_error {
 public:
  ForbiddenSpectrum(std::size_t index, const Real& lambda, const Real& gap, const std::string& context = "");
  std::size_t index() const { return index_; }
  const Real& lambda() const { return lambda_; }
  const Real& gap() const { return gap_; }

 private:
  std::size_t index_;
  Real lambda_;
  Real gap_;
};

class ProbeOutsideGrid : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// B = A^{1/4} chi A^{-1/4} + A^{-1/4} chi A^{1/4} - 1 in the orthonormal frame.
Matrix build_B(const Matrix& chi_t, const Matrix& a_neg_t, const Matrix& a_pos_t);
/// Same, inverting a_neg_t first.
Matrix build_B(const Matrix& chi_t, const Matrix& a_neg_t);

/// Orthonormal basis of the part of the space on which B can be inverted
/// by arcoth.
///
/// When chi_t is an exact projector of rank r < N/2, every vector v with
/// chi a_neg v = chi a_pos v = 0 satisfies B v = -v exactly; that eigenspace
/// has dimension at least N - 2r and carries no modular data (it is the
/// part of the discretized complement that does not see the region at all).
/// Symmetrically, rank r > N/2 produces an exact +1 eigenspace. The
/// complement of that structural eigenspace is spanned by
/// {a_neg y, a_pos y} for y in range(chi) (resp. kernel(chi)).
struct StandardSubspace {
  Matrix basis;                    ///< N x d, orthonormal columns
  std::size_t structural_dim = 0;  ///< N - d
  int structural_eigenvalue = 0;   ///< -1, +1, or 0 when nothing was removed
};

StandardSubspace standard_subspace(const Matrix& chi_t, const Matrix& a_neg_t, const Matrix& a_pos_t);

struct GatedSpectrum {
  SymEigen eigen;  ///< eigenvectors N x d (restricted to the standard subspace)
  Real min_gap;    ///< min |lambda| - 1
  Real epsilon;
};

/// Eigendecomposition of B with the requirement min |lambda| >= 1 + epsilon.
/// Throws ForbiddenSpectrum otherwise; never clamps.
GatedSpectrum spectrum_gate(const Matrix& b, const Real& epsilon);
/// Same, restricted to the given standard subspace.
GatedSpectrum spectrum_gate(const Matrix& b, const StandardSubspace& subspace, const Real& epsilon);

enum class Sign { kMinus, kPlus };

/// 2 a arcoth(B) a with a = a_neg_t (M_-) or a_pos_t (M_+), orthonormal
/// frame. arcoth(B) vanishes on the structural eigenspace.
Matrix build_M(const GatedSpectrum& gate, const Matrix& a_neg_t, const Matrix& a_pos_t, Sign sign);

/// L^2-normalized Gaussian (pi sigma^2)^{-1/4} exp(-(x - mu)^2 / (2 sigma^2)).
struct GaussianProbe {
  Real mu;
  Real sigma;
};

/// Coefficients c with G c = (integral g e_j)_j, i.e. the L^2 projection of
/// the probe onto the element span.
std::vector<Real> probe_coefficients(const BasisSet& basis, const Grid& grid, const GaussianProbe& probe);

/// c^T M_hat c for the projected probe. Throws ProbeOutsideGrid when
/// |mu| + 6 sigma >= b.
Real smear(const Matrix& m_hat, const BasisSet& basis, const Grid& grid, const GaussianProbe& probe);

/// Kernel samples on the interior grid nodes.
struct KernelSamples {
  std::vector<Real> nodes;
  Matrix values;  ///< values(i, l) = M(x_i, x_l)
  Real band_mass;         ///< sum |M| over |x - y| <= 2h
  Real off_band_mass;     ///< sum |M| over |x - y| > 2h
  Real antidiagonal_mass; ///< off-band part with |x + y - 2c| <= 2h, c the region centre
};

/// M(x, y) = e(x)^T G^{-1} M_hat G^{-1} e(y), i.e. sum of orthonormalized
/// elements against the orthonormal-frame matrix, on nodes x_1..x_{n-1}.
KernelSamples kernel_on_grid(const Matrix& m_hat, const BasisSet& basis, const Grid& grid, const RegionSpec& region);

/// Known continuum values of M_- multiplication kernels: 2 pi (mu - a) inside
/// a wedge x > a (mirrored for its complement) and the massless interval
/// parabola pi (r^2 - (mu - c)^2) / r. Empty where no reference exists.
std::optional<Real> analytic_reference(const PrecisionContext& ctx, const RegionSpec& region, bool massless_limit,
                                       const Real& mu);

struct PipelineConfig {
  RegionSpec region;
  Real mass;
  int n_cells;
  Real half_width;
  BasisMode mode = BasisMode::kSplit;
  APowerOptions a_power;
  bool compute_plus = true;
  /// Masses at or below this count as the massless limit for references.
  double massless_threshold = 1e-2;
};

struct ModularResult {
  Grid grid;
  BasisSet basis;
  PipelineConfig config;
  std::vector<Real> b_eigenvalues;  ///< standard-subspace spectrum, ascending
  std::size_t structural_dim = 0;
  int structural_eigenvalue = 0;
  Real min_gap;
  Real epsilon;
  Real chi_idempotence;  ///< max |chi_t^2 - chi_t|
  QuadratureReport quadrature;
  Matrix m_minus;                ///< hat-basis bilinear form
  std::optional<Matrix> m_plus;  ///< hat-basis bilinear form
  std::vector<std::string> warnings;
};

/// Full pipeline: basis, chi, A^{-1/4}, A^{1/4}, B, gate, M_-, M_+.
ModularResult run_pipeline(const PrecisionContext& ctx, const PipelineConfig& config);

struct ScanEntry {
  Real mu;
  Real value;
  std::optional<Real> reference;
};

/// Smears M_- at each mu (sorted ascending, duplicates rejected).
std::vector<ScanEntry> mu_scan(const ModularResult& result, std::vector<Real> mus, const Real& sigma);

}  // namespace modham
