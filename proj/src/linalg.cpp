#include "modham/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace modham {

namespace {

void require_square(const Matrix& a, const char* op) {
  if (!a.square())
    throw DimensionError(std::string(op) + ": expected a square matrix, got " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()));
}

// 10^{-digits/2} * scale, the smallest pivot accepted as nonsingular.
Real pivot_floor(const Matrix& a) {
  Real floor = pow10(a.context(), -a.context().decimal_digits() / 2);
  floor *= a.max_abs();
  return floor;
}

Matrix invert_lu(const Matrix& a) {
  const std::size_t n = a.rows();
  const PrecisionContext& ctx = a.context();
  Matrix work = a;
  Matrix inv = Matrix::identity(ctx, n);
  const Real floor = pivot_floor(a);
  Real factor(ctx), prod(ctx);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (mpfr_cmpabs(work(r, col).raw(), work(piv, col).raw()) > 0) piv = r;
    if (mpfr_cmpabs(work(piv, col).raw(), floor.raw()) <= 0) throw SingularMatrix(col, abs(work(piv, col)).to_string(10));
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        mpfr_swap(work.raw_at(col, j).raw(), work.raw_at(piv, j).raw());
        mpfr_swap(inv.raw_at(col, j).raw(), inv.raw_at(piv, j).raw());
      }
    }
    const Real pivot = work(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      mpfr_div(work.raw_at(col, j).raw(), work(col, j).raw(), pivot.raw(), MPFR_RNDN);
      mpfr_div(inv.raw_at(col, j).raw(), inv(col, j).raw(), pivot.raw(), MPFR_RNDN);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || work(r, col).is_zero()) continue;
      mpfr_set(factor.raw(), work(r, col).raw(), MPFR_RNDN);
      for (std::size_t j = 0; j < n; ++j) {
        mpfr_mul(prod.raw(), factor.raw(), work(col, j).raw(), MPFR_RNDN);
        mpfr_sub(work.raw_at(r, j).raw(), work(r, j).raw(), prod.raw(), MPFR_RNDN);
        mpfr_mul(prod.raw(), factor.raw(), inv(col, j).raw(), MPFR_RNDN);
        mpfr_sub(inv.raw_at(r, j).raw(), inv(r, j).raw(), prod.raw(), MPFR_RNDN);
      }
    }
  }
  return inv;
}

}  // namespace

Matrix cholesky(const Matrix& g) {
  require_square(g, "cholesky");
  const std::size_t n = g.rows();
  const PrecisionContext& ctx = g.context();
  Matrix l(ctx, n, n);
  Real acc(ctx), prod(ctx);
  for (std::size_t j = 0; j < n; ++j) {
    mpfr_set(acc.raw(), g(j, j).raw(), MPFR_RNDN);
    for (std::size_t k = 0; k < j; ++k) {
      mpfr_sqr(prod.raw(), l(j, k).raw(), MPFR_RNDN);
      mpfr_sub(acc.raw(), acc.raw(), prod.raw(), MPFR_RNDN);
    }
    if (acc.sign() <= 0) throw NotPositiveDefinite(j, acc.to_string(10));
    mpfr_sqrt(l.raw_at(j, j).raw(), acc.raw(), MPFR_RNDN);
    for (std::size_t i = j + 1; i < n; ++i) {
      mpfr_set(acc.raw(), g(i, j).raw(), MPFR_RNDN);
      for (std::size_t k = 0; k < j; ++k) {
        mpfr_mul(prod.raw(), l(i, k).raw(), l(j, k).raw(), MPFR_RNDN);
        mpfr_sub(acc.raw(), acc.raw(), prod.raw(), MPFR_RNDN);
      }
      mpfr_div(l.raw_at(i, j).raw(), acc.raw(), l(j, j).raw(), MPFR_RNDN);
    }
  }
  return l;
}

Matrix invert_lower(const Matrix& l) {
  require_square(l, "invert_lower");
  const std::size_t n = l.rows();
  const PrecisionContext& ctx = l.context();
  Matrix x(ctx, n, n);
  Real acc(ctx), prod(ctx);
  for (std::size_t j = 0; j < n; ++j) {
    if (l(j, j).is_zero()) throw SingularMatrix(j, "0");
    mpfr_ui_div(x.raw_at(j, j).raw(), 1, l(j, j).raw(), MPFR_RNDN);
    for (std::size_t i = j + 1; i < n; ++i) {
      mpfr_set_zero(acc.raw(), 1);
      for (std::size_t k = j; k < i; ++k) {
        mpfr_mul(prod.raw(), l(i, k).raw(), x(k, j).raw(), MPFR_RNDN);
        mpfr_add(acc.raw(), acc.raw(), prod.raw(), MPFR_RNDN);
      }
      mpfr_div(acc.raw(), acc.raw(), l(i, i).raw(), MPFR_RNDN);
      mpfr_neg(x.raw_at(i, j).raw(), acc.raw(), MPFR_RNDN);
    }
  }
  return x;
}

Matrix invert(const Matrix& a) {
  require_square(a, "invert");
  if (a.symmetric() || a.asymmetry().is_zero()) {
    try {
      const Matrix l = cholesky(a);
      const Real floor = pivot_floor(a);
      for (std::size_t j = 0; j < l.rows(); ++j) {
        Real sq = l(j, j) * l(j, j);
        if (sq <= floor) throw SingularMatrix(j, sq.to_string(10));
      }
      const Matrix l_inv = invert_lower(l);
      Matrix inv = multiply_transposed_left(l_inv, l_inv);
      inv.symmetrize();
      return inv;
    } catch (const NotPositiveDefinite&) {
      // symmetric indefinite: fall through to LU
    }
  }
  return invert_lu(a);
}

std::vector<Real> solve_spd(const Matrix& g, const std::vector<Real>& rhs) {
  require_square(g, "solve_spd");
  if (rhs.size() != g.rows()) throw DimensionError("solve_spd: right-hand side length mismatch");
  const Matrix l = cholesky(g);
  const std::size_t n = g.rows();
  const PrecisionContext& ctx = g.context();
  std::vector<Real> y(n, Real(ctx));
  Real prod(ctx);
  for (std::size_t i = 0; i < n; ++i) {
    mpfr_set(y[i].raw(), rhs[i].raw(), MPFR_RNDN);
    for (std::size_t k = 0; k < i; ++k) {
      mpfr_mul(prod.raw(), l(i, k).raw(), y[k].raw(), MPFR_RNDN);
      mpfr_sub(y[i].raw(), y[i].raw(), prod.raw(), MPFR_RNDN);
    }
    mpfr_div(y[i].raw(), y[i].raw(), l(i, i).raw(), MPFR_RNDN);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n; ++k) {
      mpfr_mul(prod.raw(), l(k, ii).raw(), y[k].raw(), MPFR_RNDN);
      mpfr_sub(y[ii].raw(), y[ii].raw(), prod.raw(), MPFR_RNDN);
    }
    mpfr_div(y[ii].raw(), y[ii].raw(), l(ii, ii).raw(), MPFR_RNDN);
  }
  return y;
}

SymEigen sym_eigen(const Matrix& input, JacobiOptions options) {
  require_square(input, "sym_eigen");
  const PrecisionContext& ctx = input.context();
  const std::size_t n = input.rows();
  {
    Real tol = pow10(ctx, -ctx.decimal_digits());
    tol *= max(input.max_abs(), Real(ctx, 1L));
    if (input.asymmetry() > tol) throw std::invalid_argument("sym_eigen: input matrix is not symmetric");
  }
  Matrix a = input;
  a.symmetrize();
  Matrix v = Matrix::identity(ctx, n);

  const int max_sweeps = options.max_sweeps > 0
                             ? options.max_sweeps
                             : static_cast<int>(std::ceil(100.0 * std::log10(ctx.decimal_digits())));

  Real frob(ctx), tmp(ctx);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      mpfr_sqr(tmp.raw(), a(i, j).raw(), MPFR_RNDN);
      mpfr_add(frob.raw(), frob.raw(), tmp.raw(), MPFR_RNDN);
    }
  mpfr_sqrt(frob.raw(), frob.raw(), MPFR_RNDN);
  Real threshold = pow10(ctx, -(ctx.decimal_digits() + ctx.guard_digits() / 2));
  threshold *= frob;

  Real off(ctx), theta(ctx), t(ctx), c(ctx), s(ctx), tau(ctx), h(ctx), g(ctx), hh(ctx), w(ctx);
  int sweep = 0;
  for (;; ++sweep) {
    mpfr_set_zero(off.raw(), 1);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        mpfr_sqr(tmp.raw(), a(p, q).raw(), MPFR_RNDN);
        mpfr_add(off.raw(), off.raw(), tmp.raw(), MPFR_RNDN);
      }
    mpfr_mul_2ui(off.raw(), off.raw(), 1, MPFR_RNDN);
    mpfr_sqrt(off.raw(), off.raw(), MPFR_RNDN);
    if (off <= threshold) break;
    if (sweep >= max_sweeps)
      throw NoConvergence("Jacobi eigensolver did not converge after " + std::to_string(max_sweeps) +
                          " sweeps (off-diagonal mass " + off.to_string(10) + ")");
    int rotations = 0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q).is_zero()) continue;
        ++rotations;
        // theta = (a_qq - a_pp) / (2 a_pq); t = sgn(theta) / (|theta| + sqrt(theta^2 + 1))
        mpfr_sub(theta.raw(), a(q, q).raw(), a(p, p).raw(), MPFR_RNDN);
        mpfr_div(theta.raw(), theta.raw(), a(p, q).raw(), MPFR_RNDN);
        mpfr_div_2ui(theta.raw(), theta.raw(), 1, MPFR_RNDN);
        mpfr_sqr(t.raw(), theta.raw(), MPFR_RNDN);
        mpfr_add_ui(t.raw(), t.raw(), 1, MPFR_RNDN);
        mpfr_sqrt(t.raw(), t.raw(), MPFR_RNDN);
        mpfr_abs(tmp.raw(), theta.raw(), MPFR_RNDN);
        mpfr_add(t.raw(), t.raw(), tmp.raw(), MPFR_RNDN);
        mpfr_ui_div(t.raw(), 1, t.raw(), MPFR_RNDN);
        if (theta.sign() < 0) mpfr_neg(t.raw(), t.raw(), MPFR_RNDN);
        // c = 1/sqrt(t^2+1), s = t c, tau = s/(1+c)
        mpfr_sqr(c.raw(), t.raw(), MPFR_RNDN);
        mpfr_add_ui(c.raw(), c.raw(), 1, MPFR_RNDN);
        mpfr_rec_sqrt(c.raw(), c.raw(), MPFR_RNDN);
        mpfr_mul(s.raw(), t.raw(), c.raw(), MPFR_RNDN);
        mpfr_add_ui(tau.raw(), c.raw(), 1, MPFR_RNDN);
        mpfr_div(tau.raw(), s.raw(), tau.raw(), MPFR_RNDN);

        mpfr_mul(h.raw(), t.raw(), a(p, q).raw(), MPFR_RNDN);
        mpfr_sub(a.raw_at(p, p).raw(), a(p, p).raw(), h.raw(), MPFR_RNDN);
        mpfr_add(a.raw_at(q, q).raw(), a(q, q).raw(), h.raw(), MPFR_RNDN);
        mpfr_set_zero(a.raw_at(p, q).raw(), 1);
        mpfr_set_zero(a.raw_at(q, p).raw(), 1);

        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          mpfr_set(g.raw(), a(k, p).raw(), MPFR_RNDN);
          mpfr_set(hh.raw(), a(k, q).raw(), MPFR_RNDN);
          // a_kp = g - s (hh + g tau)
          mpfr_mul(w.raw(), g.raw(), tau.raw(), MPFR_RNDN);
          mpfr_add(w.raw(), w.raw(), hh.raw(), MPFR_RNDN);
          mpfr_mul(w.raw(), w.raw(), s.raw(), MPFR_RNDN);
          mpfr_sub(a.raw_at(k, p).raw(), g.raw(), w.raw(), MPFR_RNDN);
          // a_kq = hh + s (g - hh tau)
          mpfr_mul(w.raw(), hh.raw(), tau.raw(), MPFR_RNDN);
          mpfr_sub(w.raw(), g.raw(), w.raw(), MPFR_RNDN);
          mpfr_mul(w.raw(), w.raw(), s.raw(), MPFR_RNDN);
          mpfr_add(a.raw_at(k, q).raw(), hh.raw(), w.raw(), MPFR_RNDN);
          mpfr_set(a.raw_at(p, k).raw(), a(k, p).raw(), MPFR_RNDN);
          mpfr_set(a.raw_at(q, k).raw(), a(k, q).raw(), MPFR_RNDN);
        }
        for (std::size_t k = 0; k < n; ++k) {
          mpfr_set(g.raw(), v(k, p).raw(), MPFR_RNDN);
          mpfr_set(hh.raw(), v(k, q).raw(), MPFR_RNDN);
          mpfr_mul(w.raw(), g.raw(), tau.raw(), MPFR_RNDN);
          mpfr_add(w.raw(), w.raw(), hh.raw(), MPFR_RNDN);
          mpfr_mul(w.raw(), w.raw(), s.raw(), MPFR_RNDN);
          mpfr_sub(v.raw_at(k, p).raw(), g.raw(), w.raw(), MPFR_RNDN);
          mpfr_mul(w.raw(), hh.raw(), tau.raw(), MPFR_RNDN);
          mpfr_sub(w.raw(), g.raw(), w.raw(), MPFR_RNDN);
          mpfr_mul(w.raw(), w.raw(), s.raw(), MPFR_RNDN);
          mpfr_add(v.raw_at(k, q).raw(), hh.raw(), w.raw(), MPFR_RNDN);
        }
      }
    }
    if (rotations == 0) break;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  SymEigen result{{}, Matrix(ctx, n, n), Real(ctx), sweep};
  result.eigenvalues.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    result.eigenvalues.push_back(a(order[j], order[j]));
    for (std::size_t i = 0; i < n; ++i)
      mpfr_set(result.eigenvectors.raw_at(i, j).raw(), v(i, order[j]).raw(), MPFR_RNDN);
  }
  Matrix au = multiply(input, result.eigenvectors);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      mpfr_mul(tmp.raw(), result.eigenvectors(i, j).raw(), result.eigenvalues[j].raw(), MPFR_RNDN);
      mpfr_sub(tmp.raw(), au(i, j).raw(), tmp.raw(), MPFR_RNDN);
      if (mpfr_cmpabs(tmp.raw(), result.residual.raw()) > 0) mpfr_abs(result.residual.raw(), tmp.raw(), MPFR_RNDN);
    }
  return result;
}

Matrix matrix_function(const std::function<Real(const Real&)>& f, const SymEigen& eig) {
  const Matrix& u = eig.eigenvectors;
  if (u.cols() != eig.eigenvalues.size()) throw DimensionError("matrix_function: eigenvector/eigenvalue count mismatch");
  const PrecisionContext& ctx = u.context();
  std::vector<Real> fv;
  fv.reserve(eig.eigenvalues.size());
  for (std::size_t j = 0; j < eig.eigenvalues.size(); ++j) {
    try {
      fv.push_back(f(eig.eigenvalues[j]));
    } catch (const EigenvalueDomainError&) {
      throw;
    } catch (const DomainError& e) {
      throw EigenvalueDomainError(j, eig.eigenvalues[j], e.what());
    }
  }
  const std::size_t n = u.rows();
  const std::size_t d = u.cols();
  Matrix scaled(ctx, n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mpfr_mul(scaled.raw_at(i, j).raw(), u(i, j).raw(), fv[j].raw(), MPFR_RNDN);
  Matrix out(ctx, n, n);
  Real acc(ctx), prod(ctx);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i; k < n; ++k) {
      mpfr_set_zero(acc.raw(), 1);
      for (std::size_t j = 0; j < d; ++j) {
        mpfr_mul(prod.raw(), scaled(i, j).raw(), u(k, j).raw(), MPFR_RNDN);
        mpfr_add(acc.raw(), acc.raw(), prod.raw(), MPFR_RNDN);
      }
      mpfr_set(out.raw_at(i, k).raw(), acc.raw(), MPFR_RNDN);
      mpfr_set(out.raw_at(k, i).raw(), acc.raw(), MPFR_RNDN);
    }
  out.symmetrize();
  return out;
}

Matrix congruence(const Matrix& l_inv, const Matrix& x) {
  if (!l_inv.square() || l_inv.cols() != x.rows() || !x.square())
    throw DimensionError("congruence: factor " + std::to_string(l_inv.rows()) + "x" + std::to_string(l_inv.cols()) +
                         " incompatible with " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  const Matrix t = multiply(l_inv, x);
  Matrix out = multiply(t, l_inv.transpose());
  if (x.symmetric() || x.asymmetry().is_zero()) out.symmetrize();
  return out;
}

Matrix spectral_reconstruction(const SymEigen& eig) {
  return matrix_function([](const Real& x) { return x; }, eig);
}

}  // namespace modham
