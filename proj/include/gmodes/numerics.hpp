#pragma once

// Precision management and summation shared by every evaluator.
//
// Two arithmetic backends sit behind one template interface: plain `double`
// and `BigFloat`, a thin RAII wrapper over MPFR whose mantissa width is taken
// from a thread-local working precision. Generic code is written against a
// `Real` template parameter and picks up `exp`, `sqrt`, ... through ADL.

#include <mpfr.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

namespace gmodes {

/// Bits of headroom kept above the resolution an experiment needs.
inline constexpr int kGuardBits = 64;

/// Mantissa bits needed to resolve oscillations of relative size
/// e^{-pi N / 2} (about 2^{-2.266 N}) with kGuardBits to spare:
/// 64 + ceil(2.27 N).
inline int required_bits(int n) {
  if (n < 1) throw std::invalid_argument("required_bits: N must be >= 1");
  const long long hundredths = 227LL * n;
  return kGuardBits + static_cast<int>((hundredths + 99) / 100);
}

/// Largest required_bits() value for which the hardware double backend is
/// trusted to count modes (N <= 18).
inline constexpr int kDoubleFastPathBits = 105;

struct PrecisionContext {
  int mantissa_bits = 53;
  double abs_tol = 0x1p-69;
  double rel_tol = 0x1p-45;

  PrecisionContext() = default;
  PrecisionContext(int bits, double abs, double rel)
      : mantissa_bits(bits), abs_tol(abs), rel_tol(rel) {
    if (bits < 53) throw std::invalid_argument("PrecisionContext: mantissa_bits must be >= 53");
    if (bits > 960) throw std::invalid_argument("PrecisionContext: mantissa_bits must be <= 960");
    if (!(abs > 0.0) || !(rel > 0.0))
      throw std::invalid_argument("PrecisionContext: tolerances must be positive");
  }

  /// Tail cutoff 16 bits below the working ulp, comparisons 8 bits above it.
  static PrecisionContext for_bits(int bits) {
    if (bits < 53) throw std::invalid_argument("PrecisionContext: mantissa_bits must be >= 53");
    return {bits, std::ldexp(1.0, -(bits + 16)), std::ldexp(1.0, -(bits - 8))};
  }

  static PrecisionContext hardware() { return for_bits(53); }
};

// ---------------------------------------------------------------------------
// BigFloat

namespace detail {
inline int& working_precision_slot() {
  thread_local int bits = 128;
  return bits;
}
}  // namespace detail

/// Mantissa width (bits) given to newly created BigFloat values on this thread.
inline int working_precision() { return detail::working_precision_slot(); }

/// Sets the working precision for the lifetime of the guard.
class ScopedPrecision {
 public:
  explicit ScopedPrecision(int bits) : saved_(detail::working_precision_slot()) {
    if (bits < 2) throw std::invalid_argument("ScopedPrecision: bits must be >= 2");
    detail::working_precision_slot() = bits;
  }
  ~ScopedPrecision() { detail::working_precision_slot() = saved_; }
  ScopedPrecision(const ScopedPrecision&) = delete;
  ScopedPrecision& operator=(const ScopedPrecision&) = delete;

 private:
  int saved_;
};

/// MPFR float. New values (and results of arithmetic) carry the thread's
/// working precision; copies keep the precision of their source.
class BigFloat {
 public:
  BigFloat() {
    mpfr_init2(v_, working_precision());
    mpfr_set_zero(v_, 1);
  }
  BigFloat(double d) {  // NOLINT(google-explicit-constructor)
    mpfr_init2(v_, working_precision());
    mpfr_set_d(v_, d, MPFR_RNDN);
  }
  BigFloat(int i) {  // NOLINT(google-explicit-constructor)
    mpfr_init2(v_, working_precision());
    mpfr_set_si(v_, i, MPFR_RNDN);
  }
  BigFloat(long i) {  // NOLINT(google-explicit-constructor)
    mpfr_init2(v_, working_precision());
    mpfr_set_si(v_, i, MPFR_RNDN);
  }
  BigFloat(long long i) {  // NOLINT(google-explicit-constructor)
    mpfr_init2(v_, working_precision());
    mpfr_set_si(v_, static_cast<long>(i), MPFR_RNDN);
  }
  explicit BigFloat(std::string_view text) {
    mpfr_init2(v_, working_precision());
    const std::string s(text);
    if (mpfr_set_str(v_, s.c_str(), 10, MPFR_RNDN) != 0) {
      mpfr_clear(v_);
      throw std::invalid_argument("BigFloat: cannot parse '" + s + "'");
    }
  }

  BigFloat(const BigFloat& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  BigFloat(BigFloat&& o) noexcept {
    v_[0] = o.v_[0];
    o.v_[0]._mpfr_d = nullptr;
  }
  BigFloat& operator=(const BigFloat& o) {
    if (this != &o) {
      if (v_[0]._mpfr_d == nullptr) mpfr_init2(v_, mpfr_get_prec(o.v_));  // moved-from
      else if (mpfr_get_prec(v_) != mpfr_get_prec(o.v_)) mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  BigFloat& operator=(BigFloat&& o) noexcept {
    std::swap(v_[0], o.v_[0]);
    return *this;
  }
  ~BigFloat() {
    if (v_[0]._mpfr_d != nullptr) mpfr_clear(v_);
  }

  int precision() const { return static_cast<int>(mpfr_get_prec(v_)); }

  explicit operator double() const { return mpfr_get_d(v_, MPFR_RNDN); }

  /// Decimal representation with `digits` significant digits (0 = enough to
  /// round-trip at this precision).
  std::string str(int digits = 0) const {
    if (digits <= 0) digits = static_cast<int>(std::ceil(precision() * 0.30103)) + 2;
    if (mpfr_zero_p(v_)) return "0";
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%.*Rg", digits, v_);
    std::string out(buf);
    mpfr_free_str(buf);
    return out;
  }

  BigFloat& operator+=(const BigFloat& o) { mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
  BigFloat& operator-=(const BigFloat& o) { mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
  BigFloat& operator*=(const BigFloat& o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
  BigFloat& operator/=(const BigFloat& o) { mpfr_div(v_, v_, o.v_, MPFR_RNDN); return *this; }
  BigFloat& operator*=(long i) { mpfr_mul_si(v_, v_, i, MPFR_RNDN); return *this; }
  BigFloat& operator*=(int i) { mpfr_mul_si(v_, v_, i, MPFR_RNDN); return *this; }

  BigFloat operator-() const {
    BigFloat r(*this);
    mpfr_neg(r.v_, r.v_, MPFR_RNDN);
    return r;
  }

  friend BigFloat operator+(const BigFloat& a, const BigFloat& b) { BigFloat r; mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN); return r; }
  friend BigFloat operator-(const BigFloat& a, const BigFloat& b) { BigFloat r; mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN); return r; }
  friend BigFloat operator*(const BigFloat& a, const BigFloat& b) { BigFloat r; mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN); return r; }
  friend BigFloat operator/(const BigFloat& a, const BigFloat& b) { BigFloat r; mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN); return r; }

  friend bool operator==(const BigFloat& a, const BigFloat& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend bool operator!=(const BigFloat& a, const BigFloat& b) { return !(a == b); }
  friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
  friend bool operator>(const BigFloat& a, const BigFloat& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
  friend bool operator<=(const BigFloat& a, const BigFloat& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
  friend bool operator>=(const BigFloat& a, const BigFloat& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }

#define GMODES_UNARY(name, fn)                 \
  friend BigFloat name(const BigFloat& x) {    \
    BigFloat r;                                \
    fn(r.v_, x.v_, MPFR_RNDN);                 \
    return r;                                  \
  }
  GMODES_UNARY(exp, mpfr_exp)
  GMODES_UNARY(log, mpfr_log)
  GMODES_UNARY(sqrt, mpfr_sqrt)
  GMODES_UNARY(cos, mpfr_cos)
  GMODES_UNARY(sin, mpfr_sin)
  GMODES_UNARY(abs, mpfr_abs)
  GMODES_UNARY(fabs, mpfr_abs)
  GMODES_UNARY(expm1, mpfr_expm1)
  GMODES_UNARY(log1p, mpfr_log1p)
#undef GMODES_UNARY

  friend BigFloat floor(const BigFloat& x) { BigFloat r; mpfr_floor(r.v_, x.v_); return r; }
  friend BigFloat ceil(const BigFloat& x) { BigFloat r; mpfr_ceil(r.v_, x.v_); return r; }
  friend BigFloat ldexp(const BigFloat& x, int e) {
    BigFloat r;
    mpfr_mul_2si(r.v_, x.v_, e, MPFR_RNDN);
    return r;
  }
  friend BigFloat pow(const BigFloat& x, long n) {
    BigFloat r;
    mpfr_pow_si(r.v_, x.v_, n, MPFR_RNDN);
    return r;
  }
  friend BigFloat pow(const BigFloat& x, const BigFloat& y) {
    BigFloat r;
    mpfr_pow(r.v_, x.v_, y.v_, MPFR_RNDN);
    return r;
  }
  friend std::ostream& operator<<(std::ostream& os, const BigFloat& x) { return os << x.str(); }
  friend bool isfinite(const BigFloat& x) { return mpfr_number_p(x.v_) != 0; }
  friend double to_double(const BigFloat& x) { return mpfr_get_d(x.v_, MPFR_RNDN); }
  friend long lround(const BigFloat& x) { return mpfr_get_si(x.v_, MPFR_RNDNA); }

  /// Unit in the last place at this value's own precision.
  friend BigFloat ulp(const BigFloat& x) {
    BigFloat r(1);
    if (mpfr_zero_p(x.v_)) return ldexp(r, mpfr_get_emin());
    return ldexp(r, static_cast<int>(mpfr_get_exp(x.v_)) - x.precision());
  }

  static BigFloat pi() {
    BigFloat r;
    mpfr_const_pi(r.v_, MPFR_RNDN);
    return r;
  }

  mpfr_ptr raw() { return v_; }
  mpfr_srcptr raw() const { return v_; }

 private:
  mpfr_t v_;
};

inline double to_double(double x) { return x; }

// ---------------------------------------------------------------------------
// Backend traits

template <class Real>
struct is_real_backend : std::bool_constant<std::is_same_v<Real, double> || std::is_same_v<Real, BigFloat>> {};

template <class Real>
inline constexpr bool is_big_v = std::is_same_v<Real, BigFloat>;

/// Mantissa bits of values created now by the backend.
template <class Real>
int backend_bits() {
  if constexpr (is_big_v<Real>) return working_precision();
  else return 53;
}

template <class Real>
Real pi() {
  if constexpr (is_big_v<Real>) return BigFloat::pi();
  else return 3.14159265358979323846;
}

/// Sets the BigFloat working precision from a context; no-op for double.
template <class Real>
class PrecisionScope {
 public:
  explicit PrecisionScope(const PrecisionContext& ctx) {
    if constexpr (is_big_v<Real>) guard_.emplace(ctx.mantissa_bits);
  }

 private:
  struct Empty {
    template <class... A> void emplace(A&&...) {}
  };
  std::conditional_t<is_big_v<Real>, std::optional<ScopedPrecision>, Empty> guard_;
};

/// Converts a decimal string exactly for BigFloat, via strtod for double.
template <class Real>
Real parse_real(std::string_view text) {
  if constexpr (is_big_v<Real>) return BigFloat(text);
  else {
    const std::string s(text);
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("cannot parse real '" + s + "'");
    return v;
  }
}

template <class Real>
std::string format_real(const Real& x) {
  if constexpr (is_big_v<Real>) return x.str();
  else {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }
}

// ---------------------------------------------------------------------------
// Summation

/// Running compensated sum. Double: Neumaier's variant of Kahan summation.
/// BigFloat: the accumulator is carried 64 bits wider than the working
/// precision and rounded once on read.
template <class Real>
class CompensatedAccumulator;

template <>
class CompensatedAccumulator<double> {
 public:
  void add(double t) {
    const double s = sum_ + t;
    if (std::fabs(sum_) >= std::fabs(t)) comp_ += (sum_ - s) + t;
    else comp_ += (t - s) + sum_;
    sum_ = s;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

template <>
class CompensatedAccumulator<BigFloat> {
 public:
  CompensatedAccumulator() : bits_(working_precision()) {
    ScopedPrecision wide(bits_ + kGuardBits);
    acc_ = BigFloat(0);
  }
  void add(const BigFloat& t) { mpfr_add(acc_.raw(), acc_.raw(), t.raw(), MPFR_RNDN); }
  BigFloat value() const {
    ScopedPrecision p(bits_);
    BigFloat r;
    mpfr_set(r.raw(), acc_.raw(), MPFR_RNDN);
    return r;
  }

 private:
  int bits_;
  BigFloat acc_;
};

/// Sum of `terms` in the given order. BigFloat sums are correctly rounded
/// (MPFR's exact summation) at ctx.mantissa_bits; double sums use Neumaier
/// compensation.
template <class Real>
Real compensated_sum(std::span<const Real> terms, const PrecisionContext& ctx) {
  if constexpr (is_big_v<Real>) {
    ScopedPrecision p(ctx.mantissa_bits);
    BigFloat r(0);
    if (terms.empty()) return r;
    std::vector<mpfr_ptr> ptrs;
    ptrs.reserve(terms.size());
    for (const auto& t : terms) ptrs.push_back(const_cast<mpfr_ptr>(t.raw()));
    mpfr_sum(r.raw(), ptrs.data(), ptrs.size(), MPFR_RNDN);
    return r;
  } else {
    CompensatedAccumulator<double> acc;
    for (double t : terms) acc.add(t);
    return acc.value();
  }
}

template <class Real>
Real compensated_sum(const std::vector<Real>& terms, const PrecisionContext& ctx) {
  return compensated_sum<Real>(std::span<const Real>(terms), ctx);
}

}  // namespace gmodes
