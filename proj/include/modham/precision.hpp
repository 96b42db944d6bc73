#pragma once

#include <mpfr.h>

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

namespace modham {

/// Raised when a function argument lies outside its natural domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised for malformed decimal input.
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Working precision for one computation.
///
/// Users think in decimal digits; internally every value carries
/// ceil((decimal_digits + guard_digits) * log2(10)) bits. Contexts are
/// immutable and cheap to copy, so they are passed by value into every
/// stage of the pipeline instead of living in global state.
class PrecisionContext {
 public:
  static constexpr int kMinDigits = 30;
  static constexpr int kDefaultGuard = 20;

  explicit PrecisionContext(int decimal_digits, int guard_digits = kDefaultGuard);

  int decimal_digits() const { return digits_; }
  int guard_digits() const { return guard_; }
  mpfr_prec_t bits() const { return bits_; }

  /// Same guard, different working digits.
  PrecisionContext with_digits(int decimal_digits) const {
    return PrecisionContext(decimal_digits, guard_);
  }
  /// Context whose working digits absorb `extra` additional digits.
  PrecisionContext widened(int extra) const {
    return PrecisionContext(digits_ + extra, guard_);
  }

  bool operator==(const PrecisionContext&) const = default;

 private:
  int digits_;
  int guard_;
  mpfr_prec_t bits_;
};

/// Arbitrary-precision real number (RAII wrapper around mpfr_t).
///
/// Binary operations produce a result at the larger of the two operand
/// precisions. NaN never escapes: operations that would produce one throw
/// DomainError instead.
class Real {
 public:
  explicit Real(const PrecisionContext& ctx);
  Real(const PrecisionContext& ctx, long value);
  Real(const PrecisionContext& ctx, int value) : Real(ctx, static_cast<long>(value)) {}
  /// Exact conversion of a binary double (no decimal rounding involved).
  Real(const PrecisionContext& ctx, double value);
  /// Parses a decimal string such as "-1.25e-3"; throws ParseError.
  Real(const PrecisionContext& ctx, std::string_view decimal);
  /// Value `num/den` rounded once.
  static Real ratio(const PrecisionContext& ctx, long num, long den);

  /// Zero with an explicit bit precision (used by internal kernels).
  explicit Real(mpfr_prec_t bits);

  Real(const Real& other);
  Real(Real&& other) noexcept;
  Real& operator=(const Real& other);
  Real& operator=(Real&& other) noexcept;
  ~Real();

  mpfr_prec_t precision() const { return mpfr_get_prec(value_); }
  /// Rounds to a different precision (returns a new value).
  Real rounded(mpfr_prec_t bits) const;

  mpfr_ptr raw() { return value_; }
  mpfr_srcptr raw() const { return value_; }

  Real& operator+=(const Real& rhs);
  Real& operator-=(const Real& rhs);
  Real& operator*=(const Real& rhs);
  Real& operator/=(const Real& rhs);
  Real& operator*=(long rhs);
  Real& operator/=(long rhs);
  Real operator-() const;

  friend Real operator+(const Real& a, const Real& b);
  friend Real operator-(const Real& a, const Real& b);
  friend Real operator*(const Real& a, const Real& b);
  friend Real operator/(const Real& a, const Real& b);
  friend Real operator*(const Real& a, long b) { Real r(a); r *= b; return r; }
  friend Real operator*(long a, const Real& b) { Real r(b); r *= a; return r; }
  friend Real operator/(const Real& a, long b) { Real r(a); r /= b; return r; }

  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.value_, b.value_) != 0; }
  friend std::partial_ordering operator<=>(const Real& a, const Real& b);
  friend bool operator==(const Real& a, long b) { return mpfr_cmp_si(a.value_, b) == 0; }
  friend std::partial_ordering operator<=>(const Real& a, long b);

  int sign() const { return mpfr_sgn(value_); }
  bool is_zero() const { return mpfr_zero_p(value_) != 0; }
  double to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }
  long to_long() const { return mpfr_get_si(value_, MPFR_RNDN); }

  /// Scientific notation "-d.ddd...e+k". `significant` = 0 prints enough
  /// digits for an exact re-read at this value's precision.
  std::string to_string(int significant = 0) const;

 private:
  mpfr_t value_;
};

Real abs(const Real& x);
Real min(const Real& a, const Real& b);
Real max(const Real& a, const Real& b);

/// 10^k at the given context.
Real pow10(const PrecisionContext& ctx, long k);
/// pi, computed as 4*atan(1).
Real pi(const PrecisionContext& ctx);

Real sqrt(const Real& x);
Real exp(const Real& x);
Real log(const Real& x);
/// log(1 + x), accurate for tiny x.
Real log1p(const Real& x);
Real sin(const Real& x);
Real cos(const Real& x);
Real atan(const Real& x);
Real pow(const Real& x, const Real& y);
Real erf(const Real& x);
Real erfc(const Real& x);
Real gamma(const Real& x);

/// Inverse hyperbolic cotangent, (1/2) ln((x+1)/(x-1)) for |x| > 1.
/// Evaluated as (1/2) log1p(2/(|x|-1)) so arguments near +-1 keep full
/// relative accuracy. Throws DomainError for |x| <= 1.
Real arcoth(const Real& x);
/// coth(y) = (e^{2y}+1)/(e^{2y}-1); y != 0.
Real coth(const Real& y);

enum class Elementary { kExp, kLn, kSqrt, kSin, kCos, kAtan };

/// Dispatches one of the elementary functions by tag.
Real elementary(Elementary fn, const Real& x);

}  // namespace modham
