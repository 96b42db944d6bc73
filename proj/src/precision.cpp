#include "modham/precision.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace modham {

namespace {

void require_finite(mpfr_srcptr x, const char* what) {
  if (!mpfr_number_p(x)) throw DomainError(std::string(what) + ": result is not a finite number");
}

mpfr_prec_t max_prec(const Real& a, const Real& b) {
  return a.precision() > b.precision() ? a.precision() : b.precision();
}

}  // namespace

PrecisionContext::PrecisionContext(int decimal_digits, int guard_digits)
    : digits_(decimal_digits), guard_(guard_digits) {
  if (decimal_digits < kMinDigits)
    throw std::invalid_argument("decimal_digits must be at least " + std::to_string(kMinDigits) +
                                " (got " + std::to_string(decimal_digits) + ")");
  if (guard_digits < 0) throw std::invalid_argument("guard_digits must be non-negative");
  bits_ = static_cast<mpfr_prec_t>(std::ceil((digits_ + guard_) * 3.321928094887362));
}

Real::Real(const PrecisionContext& ctx) {
  mpfr_init2(value_, ctx.bits());
  mpfr_set_zero(value_, 1);
}

Real::Real(mpfr_prec_t bits) {
  mpfr_init2(value_, bits);
  mpfr_set_zero(value_, 1);
}

Real::Real(const PrecisionContext& ctx, long value) {
  mpfr_init2(value_, ctx.bits());
  mpfr_set_si(value_, value, MPFR_RNDN);
}

Real::Real(const PrecisionContext& ctx, double value) {
  mpfr_init2(value_, ctx.bits());
  if (!std::isfinite(value)) {
    mpfr_clear(value_);
    throw DomainError("non-finite double");
  }
  mpfr_set_d(value_, value, MPFR_RNDN);
}

Real::Real(const PrecisionContext& ctx, std::string_view decimal) {
  mpfr_init2(value_, ctx.bits());
  std::string text(decimal);
  char* end = nullptr;
  if (!text.empty()) mpfr_strtofr(value_, text.c_str(), &end, 10, MPFR_RNDN);
  if (end == nullptr || end == text.c_str() || *end != '\0' || !mpfr_number_p(value_)) {
    mpfr_clear(value_);
    throw ParseError("not a finite decimal number: '" + text + "'");
  }
}

Real Real::ratio(const PrecisionContext& ctx, long num, long den) {
  if (den == 0) throw DomainError("ratio with zero denominator");
  Real r(ctx, num);
  mpfr_div_si(r.value_, r.value_, den, MPFR_RNDN);
  return r;
}

Real::Real(const Real& other) {
  mpfr_init2(value_, other.precision());
  mpfr_set(value_, other.value_, MPFR_RNDN);
}

Real::Real(Real&& other) noexcept {
  // Steal the limb storage; the moved-from value is left without limbs and
  // is only valid for destruction or assignment.
  *value_ = *other.value_;
  other.value_->_mpfr_d = nullptr;
}

Real& Real::operator=(const Real& other) {
  if (this == &other) return *this;
  if (value_->_mpfr_d == nullptr) {
    mpfr_init2(value_, other.precision());
  } else if (precision() != other.precision()) {
    mpfr_set_prec(value_, other.precision());
  }
  mpfr_set(value_, other.value_, MPFR_RNDN);
  return *this;
}

Real& Real::operator=(Real&& other) noexcept {
  if (this != &other) std::swap(*value_, *other.value_);
  return *this;
}

Real::~Real() {
  if (value_->_mpfr_d != nullptr) mpfr_clear(value_);
}

Real Real::rounded(mpfr_prec_t bits) const {
  Real r(bits);
  mpfr_set(r.value_, value_, MPFR_RNDN);
  return r;
}

Real& Real::operator+=(const Real& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(value_, rhs.precision(), MPFR_RNDN);
  mpfr_add(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

Real& Real::operator-=(const Real& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(value_, rhs.precision(), MPFR_RNDN);
  mpfr_sub(value_, value_, rhs.value_, MPFR_RNDN);
  return *this;
}

Real& Real::operator*=(const Real& rhs) {
  if (rhs.precision() > precision()) mpfr_prec_round(value_, rhs.precision(), MPFR_RNDN);
  mpfr_mul(value_, value_, rhs.value_, MPFR_RNDN);
  require_finite(value_, "multiplication");
  return *this;
}

Real& Real::operator/=(const Real& rhs) {
  if (rhs.is_zero()) throw DomainError("division by zero");
  if (rhs.precision() > precision()) mpfr_prec_round(value_, rhs.precision(), MPFR_RNDN);
  mpfr_div(value_, value_, rhs.value_, MPFR_RNDN);
  require_finite(value_, "division");
  return *this;
}

Real& Real::operator*=(long rhs) {
  mpfr_mul_si(value_, value_, rhs, MPFR_RNDN);
  return *this;
}

Real& Real::operator/=(long rhs) {
  if (rhs == 0) throw DomainError("division by zero");
  mpfr_div_si(value_, value_, rhs, MPFR_RNDN);
  return *this;
}

Real Real::operator-() const {
  Real r(*this);
  mpfr_neg(r.value_, r.value_, MPFR_RNDN);
  return r;
}

Real operator+(const Real& a, const Real& b) {
  Real r(max_prec(a, b));
  mpfr_add(r.value_, a.value_, b.value_, MPFR_RNDN);
  return r;
}

Real operator-(const Real& a, const Real& b) {
  Real r(max_prec(a, b));
  mpfr_sub(r.value_, a.value_, b.value_, MPFR_RNDN);
  return r;
}

Real operator*(const Real& a, const Real& b) {
  Real r(max_prec(a, b));
  mpfr_mul(r.value_, a.value_, b.value_, MPFR_RNDN);
  require_finite(r.value_, "multiplication");
  return r;
}

Real operator/(const Real& a, const Real& b) {
  if (b.is_zero()) throw DomainError("division by zero");
  Real r(max_prec(a, b));
  mpfr_div(r.value_, a.value_, b.value_, MPFR_RNDN);
  require_finite(r.value_, "division");
  return r;
}

std::partial_ordering operator<=>(const Real& a, const Real& b) {
  const int c = mpfr_cmp(a.value_, b.value_);
  return c < 0 ? std::partial_ordering::less
               : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
}

std::partial_ordering operator<=>(const Real& a, long b) {
  const int c = mpfr_cmp_si(a.value_, b);
  return c < 0 ? std::partial_ordering::less
               : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
}

std::string Real::to_string(int significant) const {
  if (mpfr_zero_p(value_)) {
    const int n = significant > 0 ? significant : static_cast<int>(mpfr_get_str_ndigits(10, precision()));
    return "0." + std::string(static_cast<size_t>(n > 1 ? n - 1 : 1), '0') + "e+00";
  }
  mpfr_exp_t exp10 = 0;
  char* digits = mpfr_get_str(nullptr, &exp10, 10, static_cast<size_t>(significant), value_, MPFR_RNDN);
  std::string s(digits);
  mpfr_free_str(digits);
  std::string out;
  size_t pos = 0;
  if (s[0] == '-') {
    out.push_back('-');
    pos = 1;
  }
  out.push_back(s[pos]);
  if (s.size() > pos + 1) {
    out.push_back('.');
    out.append(s, pos + 1, std::string::npos);
  }
  const long e = static_cast<long>(exp10) - 1;
  out.push_back('e');
  out.push_back(e < 0 ? '-' : '+');
  std::string mag = std::to_string(e < 0 ? -e : e);
  if (mag.size() < 2) mag.insert(0, "0");
  out += mag;
  return out;
}

Real abs(const Real& x) {
  Real r(x);
  mpfr_abs(r.raw(), r.raw(), MPFR_RNDN);
  return r;
}

Real min(const Real& a, const Real& b) { return b < a ? b : a; }
Real max(const Real& a, const Real& b) { return a < b ? b : a; }

Real pow10(const PrecisionContext& ctx, long k) {
  Real r(ctx, 10L);
  mpfr_pow_si(r.raw(), r.raw(), k, MPFR_RNDN);
  return r;
}

Real pi(const PrecisionContext& ctx) {
  Real one(ctx, 1L);
  Real r = atan(one);
  r *= 4;
  return r;
}

Real sqrt(const Real& x) {
  if (x.sign() < 0) throw DomainError("sqrt of negative number " + x.to_string(20));
  Real r(x.precision());
  mpfr_sqrt(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

Real exp(const Real& x) {
  Real r(x.precision());
  mpfr_exp(r.raw(), x.raw(), MPFR_RNDN);
  require_finite(r.raw(), "exp");
  return r;
}

Real log(const Real& x) {
  if (x.sign() <= 0) throw DomainError("log of non-positive number " + x.to_string(20));
  Real r(x.precision());
  mpfr_log(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

Real log1p(const Real& x) {
  if (mpfr_cmp_si(x.raw(), -1) <= 0) throw DomainError("log1p argument <= -1: " + x.to_string(20));
  Real r(x.precision());
  mpfr_log1p(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

Real sin(const Real& x) {
  Real r(x.precision());
  mpfr_sin(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

Real cos(const Real& x) {
  Real r(x.precision());
  mpfr_cos(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

Real atan(const Real& x) {
  Real r(x.precision());
  mpfr_atan(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

Real pow(const Real& x, const Real& y) {
  if (x.sign() < 0) throw DomainError("pow with negative base " + x.to_string(20));
  if (x.is_zero() && y.sign() <= 0) throw DomainError("pow(0, y) with y <= 0");
  Real r(x.precision() > y.precision() ? x.precision() : y.precision());
  mpfr_pow(r.raw(), x.raw(), y.raw(), MPFR_RNDN);
  require_finite(r.raw(), "pow");
  return r;
}

Real erf(const Real& x) {
  Real r(x.precision());
  mpfr_erf(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

Real erfc(const Real& x) {
  Real r(x.precision());
  mpfr_erfc(r.raw(), x.raw(), MPFR_RNDN);
  return r;
}

Real gamma(const Real& x) {
  if (x.sign() <= 0 && mpfr_integer_p(x.raw())) throw DomainError("gamma pole at " + x.to_string(20));
  Real r(x.precision());
  mpfr_gamma(r.raw(), x.raw(), MPFR_RNDN);
  require_finite(r.raw(), "gamma");
  return r;
}

Real arcoth(const Real& x) {
  if (mpfr_cmpabs_ui(x.raw(), 1) <= 0)
    throw DomainError("arcoth argument inside [-1, 1]: " + x.to_string(40));
  // |x| - 1 is exact for |x| near 1 (Sterbenz), so 2/(|x|-1) carries the
  // full relative precision of the gap.
  Real ax = abs(x);
  Real gap(x.precision());
  mpfr_sub_ui(gap.raw(), ax.raw(), 1, MPFR_RNDN);
  Real q(x.precision());
  mpfr_ui_div(q.raw(), 2, gap.raw(), MPFR_RNDN);
  Real r = log1p(q);
  mpfr_div_2ui(r.raw(), r.raw(), 1, MPFR_RNDN);
  if (x.sign() < 0) mpfr_neg(r.raw(), r.raw(), MPFR_RNDN);
  return r;
}

Real coth(const Real& y) {
  if (y.is_zero()) throw DomainError("coth pole at 0");
  // coth(y) = 1 + 2/(e^{2y} - 1); expm1 keeps precision for small y.
  Real t(y.precision());
  mpfr_mul_2ui(t.raw(), y.raw(), 1, MPFR_RNDN);
  mpfr_expm1(t.raw(), t.raw(), MPFR_RNDN);
  Real r(y.precision());
  mpfr_ui_div(r.raw(), 2, t.raw(), MPFR_RNDN);
  mpfr_add_ui(r.raw(), r.raw(), 1, MPFR_RNDN);
  return r;
}

Real elementary(Elementary fn, const Real& x) {
  switch (fn) {
    case Elementary::kExp: return exp(x);
    case Elementary::kLn: return log(x);
    case Elementary::kSqrt: return sqrt(x);
    case Elementary::kSin: return sin(x);
    case Elementary::kCos: return cos(x);
    case Elementary::kAtan: return atan(x);
  }
  throw std::logic_error("unknown elementary function");
}

}  // namespace modham
