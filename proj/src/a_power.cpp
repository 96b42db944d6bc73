// Matrix elements of (-d^2/dx^2 + m^2)^s, s < 0, between piecewise-linear
// elements.
//
// Every element is a combination of the two cell shapes phi_0(xi) = 1 - xi
// and phi_1(xi) = xi on single grid cells, so all entries are linear
// combinations of the dimensionless cell-pair integrals
//
//   J_ab(delta) = Gamma(-s)^{-1} int_0^inf tau^{-s-1} e^{-tau mu^2} j_ab(delta, tau) dtau,
//   j_ab(delta, tau) = int c_ab(z) g_tau(z + delta) dz,
//
// with mu = m h, g_tau the heat kernel e^{-w^2/4tau}/sqrt(4 pi tau) in units
// of h, and c_ab(z) = int phi_a(xi) phi_b(xi - z) dxi the piecewise-cubic
// cell correlation. Then (A^s)_jk = h^{1-2s} sum v_a w_b J_ab(cell_j - cell_k).

#include <array>
#include <cmath>

#include "modham/discretization.hpp"
#include "modham/quadrature.hpp"

namespace modham {

namespace {

// c_ab(z) coefficients (ascending powers of z) times 6; ab = 00, 01, 10, 11.
constexpr std::array<std::array<long, 4>, 4> kNegSixths{{{2, 3, 0, -1}, {1, -3, -3, 1}, {1, 3, 3, 1}, {2, 3, 0, -1}}};
constexpr std::array<std::array<long, 4>, 4> kPosSixths{{{2, -3, 0, 1}, {1, -3, 3, -1}, {1, 3, -3, -1}, {2, -3, 0, 1}}};
// Above this argument mpfr_erfc becomes expensive; cell integrals switch to
// a Hermite expansion.
constexpr double kErfcLimit = 3.0;
constexpr std::array<std::array<long, 4>, 4> kBinomial{{{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}}};

struct Window {
  double t_min;
  double t_max;
  double log10_tau_max;
};

// Truncation window for exp-sinh with tau = exp(pi/2 sinh t). Uses |j| <= 1:
// near 0 the weighted integrand is bounded by tau^{-s} (pi/2) cosh t, and at
// infinity additionally by e^{-tau mu^2}.
Window truncation_window(double neg_s, double mu, int digits) {
  const double target = -(digits + 5) * std::log(10.0);
  auto log_bound = [&](double t) {
    const double log_tau = M_PI / 2 * std::sinh(t);
    double v = neg_s * log_tau + std::log(M_PI / 2 * std::cosh(t));
    if (t > 0) {
      if (log_tau > 700) return -1e300;
      v -= std::exp(log_tau) * mu * mu;
    }
    return v;
  };
  double lo = 0.0;
  while (log_bound(lo) > target) {
    lo -= 0.01;
    if (lo < -12) break;
  }
  double hi = 0.0;
  while (log_bound(hi) > target) {
    hi += 0.01;
    if (hi > 10) throw DomainError("mass too small for the truncation window of the A^s quadrature");
  }
  return {lo, hi, M_PI / 2 * std::sinh(hi) / std::log(10.0)};
}

class CellKernelIntegrand {
 public:
  CellKernelIntegrand(const PrecisionContext& work, int max_offset, const Real& mu, const Real& neg_s,
                      long log2_floor)
      : work_(work),
        k_max_(max_offset),
        mu2_(mu * mu),
        neg_s_minus_1_(neg_s - Real(work, 1L)),
        inv_sqrt_pi_(Real(work, 1L) / sqrt(pi(work))),
        log2_floor_(log2_floor),
        tail_cutoff_((work.decimal_digits() + work.guard_digits() + 10) * std::log(10.0)) {
    const std::size_t m = static_cast<std::size_t>(k_max_) + 2;
    erfc_.assign(m, Real(work_));
    gauss_.assign(m, Real(work_));
    r_.assign(4 * (m - 1), Real(work_));
    p_.assign(4 * 2 * (m - 1), Real(work_));
  }

  std::size_t dim() const { return 4 * static_cast<std::size_t>(2 * k_max_ + 1); }

  void operator()(const Real& tau, const Real& weight, std::vector<Real>& out) {
    // factor = weight tau^{-s-1} e^{-tau mu^2}
    Real factor = pow(tau, neg_s_minus_1_);
    factor *= weight;
    Real damp = tau * mu2_;
    mpfr_neg(damp.raw(), damp.raw(), MPFR_RNDN);
    factor *= exp(damp);
    if (factor.is_zero() || mpfr_get_exp(factor.raw()) < log2_floor_) {
      for (auto& o : out) mpfr_set_zero(o.raw(), 1);
      return;
    }
    const Real two_tau = tau * 2;
    const Real inv_two_sqrt = Real(work_, 1L) / (sqrt(tau) * 2);
    const Real norm = inv_two_sqrt * inv_sqrt_pi_;  // 1/sqrt(4 pi tau)
    Real arg(work_), tmp(work_);
    const double a = inv_two_sqrt.to_double();
    // e^{-x_k^2} is negligible beyond k_live
    const int k_live = std::min(k_max_ + 1, static_cast<int>(std::floor(std::sqrt(tail_cutoff_) / a)));
    for (int k = 0; k <= k_max_ + 1; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      if (k > k_live) {
        mpfr_set_zero(gauss_[ks].raw(), 1);
        continue;
      }
      mpfr_mul_si(arg.raw(), inv_two_sqrt.raw(), k, MPFR_RNDN);
      if (k * a <= kErfcLimit) mpfr_erfc(erfc_[ks].raw(), arg.raw(), MPFR_RNDN);
      mpfr_sqr(arg.raw(), arg.raw(), MPFR_RNDN);
      mpfr_neg(arg.raw(), arg.raw(), MPFR_RNDN);
      mpfr_exp(gauss_[ks].raw(), arg.raw(), MPFR_RNDN);
      mpfr_mul(gauss_[ks].raw(), gauss_[ks].raw(), norm.raw(), MPFR_RNDN);
    }
    // Raw moments R_n(k) = int_k^{k+1} w^n g(w) dw.
    for (int k = 0; k <= k_max_; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      Real& r0 = r_[4 * ks];
      Real& r1 = r_[4 * ks + 1];
      Real& r2 = r_[4 * ks + 2];
      Real& r3 = r_[4 * ks + 3];
      const Real& g0 = gauss_[ks];
      const Real& g1 = gauss_[ks + 1];
      if (k > k_live) {
        for (std::size_t i = 0; i < 4; ++i) mpfr_set_zero(r_[4 * ks + i].raw(), 1);
        continue;
      }
      if ((k + 1) * a <= kErfcLimit) {
        mpfr_sub(r0.raw(), erfc_[ks].raw(), erfc_[ks + 1].raw(), MPFR_RNDN);
        mpfr_div_2ui(r0.raw(), r0.raw(), 1, MPFR_RNDN);
      } else if (k == 0) {
        mpfr_erf(r0.raw(), inv_two_sqrt.raw(), MPFR_RNDN);
        mpfr_div_2ui(r0.raw(), r0.raw(), 1, MPFR_RNDN);
      } else {
        cell_gauss_integral(r0, inv_two_sqrt, k + 1);
      }
      mpfr_sub(r1.raw(), g0.raw(), g1.raw(), MPFR_RNDN);
      mpfr_mul(r1.raw(), r1.raw(), two_tau.raw(), MPFR_RNDN);
      // R2 = 2tau (k g_k - (k+1) g_{k+1}) + 2tau R0
      mpfr_mul_si(r2.raw(), g0.raw(), k, MPFR_RNDN);
      mpfr_mul_si(tmp.raw(), g1.raw(), k + 1, MPFR_RNDN);
      mpfr_sub(r2.raw(), r2.raw(), tmp.raw(), MPFR_RNDN);
      mpfr_add(r2.raw(), r2.raw(), r0.raw(), MPFR_RNDN);
      mpfr_mul(r2.raw(), r2.raw(), two_tau.raw(), MPFR_RNDN);
      // R3 = 2tau (k^2 g_k - (k+1)^2 g_{k+1}) + 4tau R1
      mpfr_mul_si(r3.raw(), g0.raw(), static_cast<long>(k) * k, MPFR_RNDN);
      mpfr_mul_si(tmp.raw(), g1.raw(), static_cast<long>(k + 1) * (k + 1), MPFR_RNDN);
      mpfr_sub(r3.raw(), r3.raw(), tmp.raw(), MPFR_RNDN);
      mpfr_mul_2ui(tmp.raw(), r1.raw(), 1, MPFR_RNDN);
      mpfr_add(r3.raw(), r3.raw(), tmp.raw(), MPFR_RNDN);
      mpfr_mul(r3.raw(), r3.raw(), two_tau.raw(), MPFR_RNDN);
    }
    // Cell moments P_n(k') = int_0^1 y^n g(k' + y) dy for k' in [-K-1, K].
    for (int k = 0; k <= k_max_; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      for (int n = 0; n < 4; ++n) {
        Real& right = p_cell(k, n);
        Real& left = p_cell(-k - 1, n);
        mpfr_set_zero(right.raw(), 1);
        mpfr_set_zero(left.raw(), 1);
        for (int i = 0; i <= n; ++i) {
          const Real& ri = r_[4 * ks + static_cast<std::size_t>(i)];
          // (w - k)^n on [k, k+1]
          long coef = kBinomial[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] * ipow(-k, n - i);
          mpfr_mul_si(tmp.raw(), ri.raw(), coef, MPFR_RNDN);
          mpfr_add(right.raw(), right.raw(), tmp.raw(), MPFR_RNDN);
          // (k + 1 - v)^n on [k, k+1], mirrored interval [-k-1, -k]
          coef = kBinomial[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] * ipow(k + 1, n - i) *
                 ((i % 2) ? -1 : 1);
          mpfr_mul_si(tmp.raw(), ri.raw(), coef, MPFR_RNDN);
          mpfr_add(left.raw(), left.raw(), tmp.raw(), MPFR_RNDN);
        }
      }
    }
    const std::size_t span = static_cast<std::size_t>(2 * k_max_ + 1);
    std::array<Real, 4> q{Real(work_), Real(work_), Real(work_), Real(work_)};
    Real acc(work_);
    for (int delta = -k_max_; delta <= k_max_; ++delta) {
      // Q_n(delta) = int_{-1}^0 z^n g(z + delta) dz, from P_i(delta - 1).
      for (int n = 0; n < 4; ++n) {
        auto& qn = q[static_cast<std::size_t>(n)];
        mpfr_set_zero(qn.raw(), 1);
        for (int i = 0; i <= n; ++i) {
          long coef = kBinomial[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)] * (((n - i) % 2) ? -1 : 1);
          mpfr_mul_si(tmp.raw(), p_cell(delta - 1, i).raw(), coef, MPFR_RNDN);
          mpfr_add(qn.raw(), qn.raw(), tmp.raw(), MPFR_RNDN);
        }
      }
      for (std::size_t ab = 0; ab < 4; ++ab) {
        mpfr_set_zero(acc.raw(), 1);
        for (std::size_t n = 0; n < 4; ++n) {
          if (kPosSixths[ab][n] != 0) {
            mpfr_mul_si(tmp.raw(), p_cell(delta, static_cast<int>(n)).raw(), kPosSixths[ab][n], MPFR_RNDN);
            mpfr_add(acc.raw(), acc.raw(), tmp.raw(), MPFR_RNDN);
          }
          if (kNegSixths[ab][n] != 0) {
            mpfr_mul_si(tmp.raw(), q[n].raw(), kNegSixths[ab][n], MPFR_RNDN);
            mpfr_add(acc.raw(), acc.raw(), tmp.raw(), MPFR_RNDN);
          }
        }
        mpfr_div_ui(acc.raw(), acc.raw(), 6, MPFR_RNDN);
        Real& o = out[ab * span + static_cast<std::size_t>(delta + k_max_)];
        mpfr_mul(o.raw(), acc.raw(), factor.raw(), MPFR_RNDN);
      }
    }
  }

 private:
  // int_{x-a}^{x} e^{-t^2} dt / sqrt(pi) with x = (k+1) a, k >= 1, from the
  // expansion e^{-(x-u)^2} = e^{-x^2} sum_n H_n(x) u^n / n!. Every partial sum
  // is bounded by e^{-x(x-2a)} <= 1, so no digits are lost to cancellation.
  void cell_gauss_integral(Real& out, const Real& a, int end) {
    Real x(work_), h_prev(work_), h(work_), h_next(work_), c(work_), term(work_), sum(work_);
    mpfr_mul_si(x.raw(), a.raw(), end, MPFR_RNDN);
    Real envelope(work_);
    mpfr_sqr(envelope.raw(), x.raw(), MPFR_RNDN);
    mpfr_neg(envelope.raw(), envelope.raw(), MPFR_RNDN);
    mpfr_exp(envelope.raw(), envelope.raw(), MPFR_RNDN);
    const long env_exp = mpfr_zero_p(envelope.raw()) ? -work_.bits() : mpfr_get_exp(envelope.raw());
    const double xd = x.to_double(), ad = a.to_double();
    const long n_min = static_cast<long>(std::ceil(2 * xd * ad + 2 * ad * ad)) + 2;
    const long floor_exp = -static_cast<long>(work_.bits()) - 10;
    mpfr_set_ui(h.raw(), 1, MPFR_RNDN);
    mpfr_set_zero(h_prev.raw(), 1);
    mpfr_set(c.raw(), a.raw(), MPFR_RNDN);
    int small = 0;
    for (long n = 0; n < 200000; ++n) {
      mpfr_mul(term.raw(), h.raw(), c.raw(), MPFR_RNDN);
      mpfr_add(sum.raw(), sum.raw(), term.raw(), MPFR_RNDN);
      const bool negligible = mpfr_zero_p(term.raw()) || mpfr_get_exp(term.raw()) + env_exp < floor_exp;
      small = negligible ? small + 1 : 0;
      if (n >= n_min && small >= 2) break;
      // H_{n+1} = 2x H_n - 2n H_{n-1}
      mpfr_mul(h_next.raw(), h.raw(), x.raw(), MPFR_RNDN);
      mpfr_mul_2ui(h_next.raw(), h_next.raw(), 1, MPFR_RNDN);
      mpfr_mul_si(h_prev.raw(), h_prev.raw(), 2 * n, MPFR_RNDN);
      mpfr_sub(h_next.raw(), h_next.raw(), h_prev.raw(), MPFR_RNDN);
      mpfr_swap(h_prev.raw(), h.raw());
      mpfr_swap(h.raw(), h_next.raw());
      mpfr_mul(c.raw(), c.raw(), a.raw(), MPFR_RNDN);
      mpfr_div_si(c.raw(), c.raw(), n + 2, MPFR_RNDN);
    }
    mpfr_mul(out.raw(), sum.raw(), envelope.raw(), MPFR_RNDN);
    mpfr_mul(out.raw(), out.raw(), inv_sqrt_pi_.raw(), MPFR_RNDN);
  }

  static long ipow(long base, int e) {
    long r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
  }
  Real& p_cell(int k, int n) {
    return p_[4 * static_cast<std::size_t>(k + k_max_ + 1) + static_cast<std::size_t>(n)];
  }

  PrecisionContext work_;
  int k_max_;
  Real mu2_;
  Real neg_s_minus_1_;
  Real inv_sqrt_pi_;
  long log2_floor_;
  double tail_cutoff_;
  std::vector<Real> erfc_, gauss_, r_, p_;
};

}  // namespace

APowerResult a_power_matrix(const BasisSet& basis, const Grid& grid, const Real& mass, const Real& exponent,
                            APowerOptions options) {
  const PrecisionContext& ctx = grid.context();
  if (mass.sign() <= 0) throw DomainError("a_power_matrix requires m > 0");
  if (exponent.sign() >= 0)
    throw DomainError("a_power_matrix evaluates negative powers only; positive powers come from inversion");
  const Real& h = grid.spacing();
  const Real mu = mass * h;
  const Real neg_s = -exponent;
  const int target_digits = ctx.decimal_digits() + ctx.guard_digits();

  int max_offset = 0;
  for (const auto& e : basis.elements)
    for (const auto& p : e.pieces) max_offset = std::max(max_offset, p.cell);
  // offsets between cells range over [-max_cell, max_cell]
  const Window window = truncation_window(neg_s.to_double(), mu.to_double(), target_digits);
  const int extra = static_cast<int>(std::ceil(std::max(0.0, window.log10_tau_max) +
                                               3.0 * std::log10(max_offset + 2.0) + 15.0));
  const PrecisionContext work = ctx.widened(extra);

  const long log2_floor = -static_cast<long>(std::ceil((target_digits + 10) * 3.321928094887362));
  CellKernelIntegrand integrand(work, max_offset, mu.rounded(work.bits()), neg_s.rounded(work.bits()), log2_floor);
  Real tolerance = pow10(work, -ctx.decimal_digits());
  tolerance *= Real(work, options.tolerance_scale);
  QuadratureOptions qopts;
  qopts.max_level = options.max_level;
  const QuadratureResult q = exp_sinh(
      [&](const Real& x, const Real& w, std::vector<Real>& out) { integrand(x, w, out); }, integrand.dim(), work,
      window.t_min, window.t_max, tolerance, qopts);

  // h^{1-2s} / Gamma(-s)
  Real scale = pow(h.rounded(work.bits()), Real(work, 1L) + neg_s * 2) / gamma(neg_s.rounded(work.bits()));

  const std::size_t span = static_cast<std::size_t>(2 * max_offset + 1);
  const std::size_t n = basis.size();
  Matrix out(ctx, n, n);
  Real acc(work), tmp(work);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j; k < n; ++k) {
      mpfr_set_zero(acc.raw(), 1);
      for (const auto& pj : basis.elements[j].pieces)
        for (const auto& pk : basis.elements[k].pieces) {
          const std::size_t off = static_cast<std::size_t>(pj.cell - pk.cell + max_offset);
          const std::array<long, 2> vj{pj.left_value, pj.right_value};
          const std::array<long, 2> vk{pk.left_value, pk.right_value};
          for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t b = 0; b < 2; ++b) {
              const long c = vj[a] * vk[b];
              if (c == 0) continue;
              mpfr_mul_si(tmp.raw(), q.values[(2 * a + b) * span + off].raw(), c, MPFR_RNDN);
              mpfr_add(acc.raw(), acc.raw(), tmp.raw(), MPFR_RNDN);
            }
        }
      mpfr_mul(acc.raw(), acc.raw(), scale.raw(), MPFR_RNDN);
      mpfr_set(out.raw_at(j, k).raw(), acc.raw(), MPFR_RNDN);
      mpfr_set(out.raw_at(k, j).raw(), acc.raw(), MPFR_RNDN);
    }
  out.symmetrize();
  Real err = q.error_estimate * scale;
  return APowerResult{std::move(out), QuadratureReport{err.rounded(ctx.bits()), q.level, q.evaluations}};
}

}  // namespace modham
