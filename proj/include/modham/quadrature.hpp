#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "modham/precision.hpp"

namespace modham {

class QuadratureNotConverged : public std::runtime_error {
 public:
  QuadratureNotConverged(int levels, const Real& estimate)
      : std::runtime_error("quadrature did not converge after " + std::to_string(levels) +
                           " refinement levels (error estimate " + estimate.to_string(6) + ")"),
        estimate_(estimate) {}
  const Real& estimate() const { return estimate_; }

 private:
  Real estimate_;
};

struct QuadratureOptions {
  int max_level = 12;  ///< step halvings after the initial step
  int min_level = 3;
};

struct QuadratureResult {
  std::vector<Real> values;
  Real error_estimate;  ///< predicted error from the last two level differences
  int level = 0;
  std::size_t evaluations = 0;
};

/// Vector integrand on (0, inf): fills `out` (size dim) with f(x) * weight.
using HalfLineIntegrand = std::function<void(const Real& x, const Real& weight, std::vector<Real>& out)>;

/// Exp-sinh rule, x = exp(pi/2 sinh t), summed over t in [t_min, t_max].
///
/// The caller derives the truncation window from analytic bounds on the
/// integrand at both ends; within the window the trapezoid step is halved
/// until successive levels agree to `tolerance` in every component.
QuadratureResult exp_sinh(const HalfLineIntegrand& f, std::size_t dim, const PrecisionContext& ctx, double t_min,
                          double t_max, const Real& tolerance, QuadratureOptions options = {});

/// Scalar integrand on [a, b]. It receives the abscissa together with its
/// distances to both endpoints, computed without cancellation so that
/// endpoint singularities such as |x - a|^{-1/2} are resolved.
using IntervalIntegrand = std::function<Real(const Real& x, const Real& from_a, const Real& to_b)>;

/// Tanh-sinh rule on a finite interval.
QuadratureResult tanh_sinh(const IntervalIntegrand& f, const Real& a, const Real& b, const PrecisionContext& ctx,
                           const Real& tolerance, QuadratureOptions options = {});

/// Window [-T, T] for tanh-sinh so that node weights fall below 10^{-digits}.
double tanh_sinh_window(int digits);

}  // namespace modham
