#include "modham/quadrature.hpp"

#include <cmath>

namespace modham {

namespace {

constexpr double kInitialStep = 0.5;

Real step_at_level(const PrecisionContext& ctx, int level) {
  Real eta(ctx, kInitialStep);
  mpfr_div_2ui(eta.raw(), eta.raw(), static_cast<unsigned long>(level), MPFR_RNDN);
  return eta;
}

// log10 |x| without double underflow; very negative for x = 0.
double log10_abs(const Real& x) {
  if (x.is_zero()) return -1e9;
  long e = 0;
  const double m = mpfr_get_d_2exp(&e, x.raw(), MPFR_RNDN);
  return std::log10(std::fabs(m)) + static_cast<double>(e) * std::log10(2.0);
}

// Runs the shared level-doubling loop. `sum_nodes(level, acc)` adds the
// level's new node contributions (unscaled by the step) into acc.
//
// The error of a double-exponential rule roughly squares with each step
// halving, so with successive differences d_{k-1}, d_k the current error is
// estimated as d_k^(log d_k / log d_{k-1}) once the differences shrink.
QuadratureResult refine(std::size_t dim, const PrecisionContext& ctx, const Real& tolerance,
                        const QuadratureOptions& options,
                        const std::function<std::size_t(int, std::vector<Real>&)>& sum_nodes) {
  QuadratureResult result{std::vector<Real>(dim, Real(ctx)), Real(ctx), 0, 0};
  std::vector<Real> acc(dim, Real(ctx));
  std::vector<Real> previous(dim, Real(ctx));
  Real diff(ctx);
  const double log_tolerance = log10_abs(tolerance);
  double previous_log_diff = 0.0;
  for (int level = 0; level <= options.max_level; ++level) {
    for (auto& a : acc) mpfr_set_zero(a.raw(), 1);
    result.evaluations += sum_nodes(level, acc);
    const Real eta = step_at_level(ctx, level);
    Real worst(ctx);
    for (std::size_t i = 0; i < dim; ++i) {
      mpfr_set(previous[i].raw(), result.values[i].raw(), MPFR_RNDN);
      if (level > 0) mpfr_div_2ui(result.values[i].raw(), result.values[i].raw(), 1, MPFR_RNDN);
      mpfr_mul(acc[i].raw(), acc[i].raw(), eta.raw(), MPFR_RNDN);
      mpfr_add(result.values[i].raw(), result.values[i].raw(), acc[i].raw(), MPFR_RNDN);
      mpfr_sub(diff.raw(), result.values[i].raw(), previous[i].raw(), MPFR_RNDN);
      if (mpfr_cmpabs(diff.raw(), worst.raw()) > 0) mpfr_abs(worst.raw(), diff.raw(), MPFR_RNDN);
    }
    result.level = level;
    const double log_diff = log10_abs(worst);
    double log_error = log_diff;
    if (level >= 2 && previous_log_diff < -1.0 && log_diff < previous_log_diff)
      log_error = log_diff * log_diff / previous_log_diff;
    previous_log_diff = log_diff;
    result.error_estimate = log_error < log_diff ? pow10(ctx, static_cast<long>(std::ceil(log_error))) : worst;
    if (level >= options.min_level && log_error <= log_tolerance) return result;
  }
  throw QuadratureNotConverged(options.max_level, result.error_estimate);
}

}  // namespace

double tanh_sinh_window(int digits) {
  return std::log(4.0 * digits * std::log(10.0) / M_PI) + 0.5;
}

QuadratureResult exp_sinh(const HalfLineIntegrand& f, std::size_t dim, const PrecisionContext& ctx, double t_min,
                          double t_max, const Real& tolerance, QuadratureOptions options) {
  if (!(t_min < t_max)) throw std::invalid_argument("exp_sinh: empty truncation window");
  const Real half_pi = pi(ctx) / 2;
  std::vector<Real> node(dim, Real(ctx));
  Real t(ctx), sh(ctx), ch(ctx), x(ctx), w(ctx);
  auto sum_nodes = [&](int level, std::vector<Real>& acc) -> std::size_t {
    const double eta = kInitialStep / std::ldexp(1.0, level);
    const long k_lo = static_cast<long>(std::ceil(t_min / eta));
    const long k_hi = static_cast<long>(std::floor(t_max / eta));
    std::size_t count = 0;
    for (long k = k_lo; k <= k_hi; ++k) {
      if (level > 0 && (k % 2) == 0) continue;
      mpfr_set_si(t.raw(), k, MPFR_RNDN);
      mpfr_mul_d(t.raw(), t.raw(), kInitialStep, MPFR_RNDN);
      mpfr_div_2ui(t.raw(), t.raw(), static_cast<unsigned long>(level), MPFR_RNDN);
      mpfr_sinh_cosh(sh.raw(), ch.raw(), t.raw(), MPFR_RNDN);
      mpfr_mul(x.raw(), sh.raw(), half_pi.raw(), MPFR_RNDN);
      mpfr_exp(x.raw(), x.raw(), MPFR_RNDN);
      mpfr_mul(w.raw(), x.raw(), ch.raw(), MPFR_RNDN);
      mpfr_mul(w.raw(), w.raw(), half_pi.raw(), MPFR_RNDN);
      f(x, w, node);
      for (std::size_t i = 0; i < dim; ++i) mpfr_add(acc[i].raw(), acc[i].raw(), node[i].raw(), MPFR_RNDN);
      ++count;
    }
    return count;
  };
  return refine(dim, ctx, tolerance, options, sum_nodes);
}

QuadratureResult tanh_sinh(const IntervalIntegrand& f, const Real& a, const Real& b, const PrecisionContext& ctx,
                           const Real& tolerance, QuadratureOptions options) {
  if (!(a < b)) throw std::invalid_argument("tanh_sinh: interval must satisfy a < b");
  const double window = tanh_sinh_window(ctx.decimal_digits() + ctx.guard_digits());
  const Real half_pi = pi(ctx) / 2;
  Real radius = (b - a) / 2;
  Real center = (a + b) / 2;
  Real t(ctx), sh(ctx), ch(ctx), u(ctx), e2u(ctx), x(ctx), from_a(ctx), to_b(ctx), w(ctx), tmp(ctx);
  auto sum_nodes = [&](int level, std::vector<Real>& acc) -> std::size_t {
    const double eta = kInitialStep / std::ldexp(1.0, level);
    const long k_max = static_cast<long>(std::floor(window / eta));
    std::size_t count = 0;
    for (long k = -k_max; k <= k_max; ++k) {
      if (level > 0 && (k % 2) == 0) continue;
      mpfr_set_si(t.raw(), k, MPFR_RNDN);
      mpfr_mul_d(t.raw(), t.raw(), kInitialStep, MPFR_RNDN);
      mpfr_div_2ui(t.raw(), t.raw(), static_cast<unsigned long>(level), MPFR_RNDN);
      mpfr_sinh_cosh(sh.raw(), ch.raw(), t.raw(), MPFR_RNDN);
      mpfr_mul(u.raw(), sh.raw(), half_pi.raw(), MPFR_RNDN);
      // from_a = 2r / (1 + e^{-2u}), to_b = 2r / (1 + e^{2u})
      mpfr_mul_2ui(e2u.raw(), u.raw(), 1, MPFR_RNDN);
      mpfr_exp(e2u.raw(), e2u.raw(), MPFR_RNDN);
      mpfr_add_ui(tmp.raw(), e2u.raw(), 1, MPFR_RNDN);
      mpfr_mul_2ui(to_b.raw(), radius.raw(), 1, MPFR_RNDN);
      mpfr_div(to_b.raw(), to_b.raw(), tmp.raw(), MPFR_RNDN);
      mpfr_ui_div(tmp.raw(), 1, e2u.raw(), MPFR_RNDN);
      mpfr_add_ui(tmp.raw(), tmp.raw(), 1, MPFR_RNDN);
      mpfr_mul_2ui(from_a.raw(), radius.raw(), 1, MPFR_RNDN);
      mpfr_div(from_a.raw(), from_a.raw(), tmp.raw(), MPFR_RNDN);
      if (from_a.is_zero() || to_b.is_zero()) continue;
      if (k < 0) {
        mpfr_add(x.raw(), a.raw(), from_a.raw(), MPFR_RNDN);
      } else {
        mpfr_sub(x.raw(), b.raw(), to_b.raw(), MPFR_RNDN);
      }
      // weight = r (pi/2) cosh t sech^2 u = r (pi/2) cosh t * 4 e^{2u} / (1 + e^{2u})^2
      mpfr_add_ui(tmp.raw(), e2u.raw(), 1, MPFR_RNDN);
      mpfr_sqr(tmp.raw(), tmp.raw(), MPFR_RNDN);
      mpfr_div(w.raw(), e2u.raw(), tmp.raw(), MPFR_RNDN);
      mpfr_mul_2ui(w.raw(), w.raw(), 2, MPFR_RNDN);
      mpfr_mul(w.raw(), w.raw(), ch.raw(), MPFR_RNDN);
      mpfr_mul(w.raw(), w.raw(), half_pi.raw(), MPFR_RNDN);
      mpfr_mul(w.raw(), w.raw(), radius.raw(), MPFR_RNDN);
      if (w.is_zero()) continue;
      Real value = f(x, from_a, to_b);
      mpfr_mul(value.raw(), value.raw(), w.raw(), MPFR_RNDN);
      mpfr_add(acc[0].raw(), acc[0].raw(), value.raw(), MPFR_RNDN);
      ++count;
    }
    return count;
  };
  return refine(1, ctx, tolerance, options, sum_nodes);
}

}  // namespace modham
