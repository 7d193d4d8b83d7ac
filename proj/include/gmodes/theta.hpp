#pragma once

// The periodized Gaussian f_a(x) = sum_{n in Z^d} phi_d(x - a n).
//
// Evaluated either directly (space domain, fast for large a) or through its
// Poisson-dual Fourier series (frequency domain, fast for small a):
//
//   f_a(x) = (1/a) sum_n exp(-2 pi^2 n^2 / a^2) cos(2 pi n x / a)      (d = 1)
//
// and as a product of one-dimensional factors for d > 1. Also the hill
// height h_a = f_a(0) - f_a(a/2), its closed-form bounds, and the sup-norm
// truncation bound for f_a - f_{a,N}.

#include <gmodes/numerics.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace gmodes {

template <class Real>
struct ThetaSeries {
  Real a;
  int dim = 1;

  ThetaSeries(Real spacing, int d = 1) : a(std::move(spacing)), dim(d) {
    if (!(a > Real(0))) throw std::invalid_argument("ThetaSeries: a must be positive");
    if (dim < 1) throw std::invalid_argument("ThetaSeries: dim must be positive");
  }
};

template <class Real>
struct HBounds {
  Real lower;
  Real upper;
};

enum class ThetaDomain { space, frequency };

/// Crossover sqrt(2 pi): the space and frequency series decay at equal rates.
inline double theta_crossover() { return std::sqrt(2.0 * 3.14159265358979323846); }

inline ThetaDomain theta_domain_for(double a) {
  return a < theta_crossover() ? ThetaDomain::frequency : ThetaDomain::space;
}

namespace detail {

inline constexpr double kPi = 3.14159265358979323846;

/// log of the n-th Fourier coefficient ratio: -2 pi^2 n^2 / a^2.
inline double log_q(double a, long n) { return -2.0 * kPi * kPi * double(n) * double(n) / (a * a); }

/// Bound on sum_{m > n} exp(log_q(m)) given the ratio between consecutive
/// terms is at most exp(log_q(n+1) - log_q(n)) for m > n.
inline double freq_tail(double a, long n) {
  const double first = log_q(a, n + 1);
  const double ratio = std::exp(log_q(a, n + 2) - log_q(a, n + 1));
  if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
  return std::exp(first) / (1.0 - ratio);
}

template <class Real>
Real theta_space_1d(const Real& a, const Real& x, double abs_tol) {
  using std::exp;
  using std::floor;
  const double ad = to_double(a);
  const double xd = to_double(x);
  const long n0 = std::lround(xd / ad);
  const Real minus_half(-0.5);
  CompensatedAccumulator<Real> acc;
  auto term = [&](long n) {
    Real t = x - a * Real(n);
    return exp(minus_half * t * t);
  };
  acc.add(term(n0));
  const double inv_sqrt_2pi = 0.3989422804014327;
  // Tail from index m outward: with t = distance to the first omitted center,
  // sum_j phi(t + a j) <= phi(t) / (1 - exp(-a t)).
  auto tail = [&](double t) {
    if (t <= 0) return std::numeric_limits<double>::infinity();
    const double denom = -std::expm1(-ad * t);
    return inv_sqrt_2pi * std::exp(-0.5 * t * t) / denom;
  };
  for (long m = n0 + 1;; ++m) {
    const double t = ad * m - xd;
    if (tail(t) < 0.5 * abs_tol) break;
    acc.add(term(m));
  }
  for (long m = n0 - 1;; --m) {
    const double t = xd - ad * m;
    if (tail(t) < 0.5 * abs_tol) break;
    acc.add(term(m));
  }
  using std::sqrt;
  return acc.value() / sqrt(Real(2) * pi<Real>());
}

/// sum_{n >= 1} q_n c_n where q_n = exp(-2 pi^2 n^2 / a^2), truncated when
/// the geometric tail falls below `cutoff`. `coef(n)` supplies c_n with
/// |c_n| <= 1. When `relative` is set the cutoff scales with q_1.
template <class Real, class Coef>
Real fourier_sum(const Real& a, double cutoff, bool relative, Coef&& coef, long step = 1, long first = 1) {
  using std::exp;
  const double ad = to_double(a);
  const Real scale = Real(-2) * pi<Real>() * pi<Real>() / (a * a);
  const double ref = relative ? std::exp(log_q(ad, first)) : 1.0;
  CompensatedAccumulator<Real> acc;
  for (long n = first;; n += step) {
    Real q = exp(scale * Real(n) * Real(n));
    acc.add(q * coef(n));
    const double t = freq_tail(ad, n + step - 1);
    if (t <= cutoff * ref || n > 100000) break;
  }
  return acc.value();
}

/// 1 + 2 sum q_n cos(...) cancels down to about a * 2 phi(a/2) between lattice
/// points, so the extended backend sums with 32 extra bits and rounds once.
template <class Real>
Real theta_freq_1d(const Real& a, const Real& x, double abs_tol) {
  using std::cos;
  if constexpr (is_big_v<Real>) {
    const int bits = working_precision();
    Real wide;
    {
      ScopedPrecision guard(bits + 32);
      const Real aw = Real(0) + a, xw = Real(0) + x;
      const Real w = Real(2) * pi<Real>() * xw / aw;
      Real s = fourier_sum(aw, 0.25 * abs_tol * to_double(a), false, [&](long n) { return cos(w * Real(n)); });
      wide = (Real(1) + Real(2) * s) / aw;
    }
    return Real(0) + wide;
  } else {
    const Real w = Real(2) * pi<Real>() * x / a;
    Real s = fourier_sum(a, 0.25 * abs_tol * to_double(a), false, [&](long n) { return cos(w * Real(n)); });
    return (Real(1) + Real(2) * s) / a;
  }
}

/// f_a(0) - f_a(x) = (4/a) sum_{n>=1} q_n sin^2(pi n x / a); no cancellation.
template <class Real>
Real theta_drop_1d(const Real& a, const Real& x, double rel_cutoff) {
  using std::sin;
  const Real w = pi<Real>() * x / a;
  Real s = fourier_sum(a, rel_cutoff, true, [&](long n) {
    Real v = sin(w * Real(n));
    return v * v;
  });
  return Real(4) * s / a;
}

/// f_a(x) - 1/a = (2/a) sum_{n>=1} q_n cos(2 pi n x / a).
template <class Real>
Real theta_osc_1d(const Real& a, const Real& x, double rel_cutoff) {
  using std::cos;
  const Real w = Real(2) * pi<Real>() * x / a;
  Real s = fourier_sum(a, rel_cutoff, true, [&](long n) { return cos(w * Real(n)); });
  return Real(2) * s / a;
}

template <class Real>
Real theta_1d(const Real& a, const Real& x, double abs_tol) {
  return theta_domain_for(to_double(a)) == ThetaDomain::frequency ? theta_freq_1d(a, x, abs_tol)
                                                                   : theta_space_1d(a, x, abs_tol);
}

inline void check_theta_dim(std::size_t got, int want) {
  if (got != static_cast<std::size_t>(want))
    throw std::invalid_argument("theta: point dimension does not match series");
}

}  // namespace detail

/// Direct lattice sum, product over coordinates in d dimensions.
template <class Real>
Real theta_space(const ThetaSeries<Real>& t, std::span<const Real> x, const PrecisionContext& ctx) {
  PrecisionScope<Real> scope(ctx);
  detail::check_theta_dim(x.size(), t.dim);
  Real out(1);
  for (int j = 0; j < t.dim; ++j) out *= detail::theta_space_1d(t.a, x[j], ctx.abs_tol);
  return out;
}

/// Poisson-dual Fourier series, product over coordinates in d dimensions.
template <class Real>
Real theta_freq(const ThetaSeries<Real>& t, std::span<const Real> x, const PrecisionContext& ctx) {
  PrecisionScope<Real> scope(ctx);
  detail::check_theta_dim(x.size(), t.dim);
  Real out(1);
  for (int j = 0; j < t.dim; ++j) out *= detail::theta_freq_1d(t.a, x[j], ctx.abs_tol);
  return out;
}

/// Frequency series below a = sqrt(2 pi), direct sum at and above it.
template <class Real>
Real theta(const ThetaSeries<Real>& t, std::span<const Real> x, const PrecisionContext& ctx) {
  return theta_domain_for(to_double(t.a)) == ThetaDomain::frequency ? theta_freq(t, x, ctx)
                                                                     : theta_space(t, x, ctx);
}

template <class Real>
Real theta(const ThetaSeries<Real>& t, const Real& x, const PrecisionContext& ctx) {
  return theta(t, std::span<const Real>(&x, 1), ctx);
}

/// h_a = f_a(0) - f_a(a/2) = (4/a) sum_{n odd > 0} exp(-2 pi^2 n^2 / a^2),
/// evaluated as (4/a) q (1 + sum_{n odd >= 3} q^{n^2 - 1}) with the leading
/// factor formed exactly as in h_bounds, so lower <= h_exact survives rounding.
template <class Real>
Real h_exact(const Real& a, const PrecisionContext& ctx) {
  using std::exp;
  PrecisionScope<Real> scope(ctx);
  if (!(a > Real(0))) throw std::invalid_argument("h_exact: a must be positive");
  const Real e = Real(-2) * pi<Real>() * pi<Real>() / (a * a);
  const Real lead = Real(4) / a * exp(e);
  const double ad = to_double(a);
  CompensatedAccumulator<Real> acc;
  for (long n = 3; n < 200001; n += 2) {
    acc.add(exp(e * Real(n * n - 1)));
    const double tail = detail::freq_tail(ad, n + 1) / std::exp(detail::log_q(ad, 1));
    if (!(tail > ctx.abs_tol)) break;
  }
  return lead * (Real(1) + acc.value());
}

/// lower = (4/a) e^{-2 pi^2/a^2}, upper = lower / (1 - e^{-2 pi^2/a^2}).
template <class Real>
HBounds<Real> h_bounds(const Real& a) {
  using std::exp;
  using std::expm1;
  if (!(a > Real(0))) throw std::invalid_argument("h_bounds: a must be positive");
  const Real e = Real(-2) * pi<Real>() * pi<Real>() / (a * a);
  Real lower = Real(4) / a * exp(e);
  Real upper = lower / (-expm1(e));
  return {lower, upper};
}

/// max f_a - min f_a over one period: 1024 samples of the oscillating part
/// f_a - 1/a, then golden-section refinement around the extreme samples.
template <class Real>
Real hbar_exact(const Real& a, const PrecisionContext& ctx) {
  using std::sqrt;
  PrecisionScope<Real> scope(ctx);
  if (!(a > Real(0))) throw std::invalid_argument("hbar_exact: a must be positive");
  constexpr int kSamples = 1024;
  const double cut = ctx.abs_tol;
  auto f = [&](const Real& x) { return detail::theta_osc_1d(a, x, cut); };
  std::vector<Real> v;
  v.reserve(kSamples);
  const Real h = a / Real(kSamples);
  int imax = 0, imin = 0;
  for (int i = 0; i < kSamples; ++i) {
    v.push_back(f(h * Real(i)));
    if (v[i] > v[imax]) imax = i;
    if (v[i] < v[imin]) imin = i;
  }
  // Golden-section search for the extremum of sign * f on [c - h, c + h].
  auto refine = [&](int i, int sign) {
    const Real phi_inv = (sqrt(Real(5)) - Real(1)) / Real(2);
    Real lo = h * Real(i) - h, hi = h * Real(i) + h;
    Real x1 = hi - phi_inv * (hi - lo), x2 = lo + phi_inv * (hi - lo);
    Real f1 = f(x1) * Real(sign), f2 = f(x2) * Real(sign);
    for (int it = 0; it < 80; ++it) {
      if (f1 > f2) {
        hi = x2; x2 = x1; f2 = f1;
        x1 = hi - phi_inv * (hi - lo);
        f1 = f(x1) * Real(sign);
      } else {
        lo = x1; x1 = x2; f1 = f2;
        x2 = lo + phi_inv * (hi - lo);
        f2 = f(x2) * Real(sign);
      }
    }
    Real best = (f1 > f2 ? f1 : f2) * Real(sign);
    return best;
  };
  Real vmax = v[imax], vmin = v[imin];
  Real rmax = refine(imax, 1), rmin = refine(imin, -1);
  if (rmax > vmax) vmax = rmax;
  if (rmin < vmin) vmin = rmin;
  return vmax - vmin;
}

/// C_0 = (2/sqrt(2 pi)) e^{-2 pi} / (1 - e^{-2 pi}) ~= 1.4927e-3.
template <class Real>
Real truncation_constant() {
  using std::exp;
  using std::sqrt;
  const Real e = exp(Real(-2) * pi<Real>());
  return Real(2) / sqrt(Real(2) * pi<Real>()) * e / (Real(1) - e);
}

/// Bound on sup_{|x| <= aN/2} |f_a(x) - f_{a,N}(x)|:
/// (2/sqrt(2 pi)) e^{-a^2 N^2/8} e^{-a^2 N/2} / (1 - e^{-a^2 N/2}).
template <class Real>
Real truncation_bound(const Real& a, int n) {
  using std::exp;
  using std::expm1;
  using std::sqrt;
  if (!(a > Real(0))) throw std::invalid_argument("truncation_bound: a must be positive");
  if (n < 1) throw std::invalid_argument("truncation_bound: N must be >= 1");
  const Real nn(n);
  const Real a2 = a * a;
  const Real g = Real(-0.5) * a2 * nn;
  return Real(2) / sqrt(Real(2) * pi<Real>()) * exp(Real(-0.125) * a2 * nn * nn) * exp(g) / (-expm1(g));
}

template <class Real>
struct EdgeGap {
  Real gap;              // f_a(0) - max over the cell boundary
  Real proxy;            // (3 / a^d) e^{-1/(2 a^2)}
  Real corrected_proxy;  // (3 / a^d) e^{-2 pi^2 / a^2}
  std::vector<Real> argmax;  // boundary point attaining the sampled maximum
};

/// f_a(0) minus the maximum of f_a over the boundary {|x|_inf = a/2} of the
/// fundamental cell. Each face is sampled on a 33^{d-1} grid (center and
/// corners included) and the best sample refined by coordinate-wise
/// golden-section search. Differences are formed from the one-dimensional
/// drops f_a(0) - f_a(x_j), so nothing cancels for small a.
template <class Real>
EdgeGap<Real> theta_d_center_edge_gap(const Real& a, int d, const PrecisionContext& ctx) {
  using std::abs;
  using std::exp;
  using std::sqrt;
  PrecisionScope<Real> scope(ctx);
  if (d < 1 || d > 3) throw std::invalid_argument("theta_d_center_edge_gap: d must be 1, 2 or 3");
  if (!(a > Real(0))) throw std::invalid_argument("theta_d_center_edge_gap: a must be positive");
  const double cut = ctx.abs_tol;
  const Real zero(0);
  const Real t0 = detail::theta_1d(a, zero, ctx.abs_tol);

  // gap(x) = sum_j [prod_{i<j} f(x_i)] * drop(x_j) * f(0)^{d-1-j}
  auto combine = [&](const std::vector<Real>& th, const std::vector<Real>& dr) {
    Real total(0);
    for (int j = 0; j < d; ++j) {
      Real term = dr[j];
      for (int i = 0; i < j; ++i) term *= th[i];
      for (int i = j + 1; i < d; ++i) term *= t0;
      total += term;
    }
    return total;
  };
  auto gap_at = [&](const std::vector<Real>& x) {
    std::vector<Real> th(d), dr(d);
    for (int j = 0; j < d; ++j) {
      th[j] = detail::theta_1d(a, x[j], ctx.abs_tol);
      dr[j] = detail::theta_drop_1d(a, x[j], cut);
    }
    return combine(th, dr);
  };

  constexpr int kGrid = 33;
  const Real half = a / Real(2);
  std::vector<Real> coords;
  for (int i = 0; i < kGrid; ++i) coords.push_back(-half + a * Real(i) / Real(kGrid - 1));
  // One-dimensional factors on the sample grid, computed once.
  std::vector<Real> grid_th, grid_dr;
  for (const auto& c : coords) {
    grid_th.push_back(detail::theta_1d(a, c, ctx.abs_tol));
    grid_dr.push_back(detail::theta_drop_1d(a, c, cut));
  }

  bool have = false;
  Real best_gap(0);
  std::vector<Real> best_x;
  const int free_dims = d - 1;
  int combos = 1;
  for (int k = 0; k < free_dims; ++k) combos *= kGrid;
  for (int axis = 0; axis < d; ++axis) {
    for (int sign = -1; sign <= 1; sign += 2) {
      const int edge = sign > 0 ? kGrid - 1 : 0;
      for (int c = 0; c < combos; ++c) {
        std::vector<Real> x(d), th(d), dr(d);
        int rem = c;
        for (int j = 0; j < d; ++j) {
          int idx = edge;
          if (j != axis) {
            idx = rem % kGrid;
            rem /= kGrid;
          }
          x[j] = j == axis ? (sign > 0 ? half : -half) : coords[idx];
          th[j] = grid_th[idx];
          dr[j] = grid_dr[idx];
        }
        Real g = combine(th, dr);
        if (!have || g < best_gap) {
          have = true;
          best_gap = g;
          best_x = x;
        }
      }
    }
  }

  // Coordinate-wise golden-section refinement inside the winning face.
  if (free_dims > 0) {
    int face_axis = 0;
    for (int j = 0; j < d; ++j)
      if (abs(best_x[j]) == half) { face_axis = j; break; }
    const Real step = a / Real(kGrid - 1);
    const Real phi_inv = (sqrt(Real(5)) - Real(1)) / Real(2);
    for (int sweep = 0; sweep < 3; ++sweep) {
      for (int j = 0; j < d; ++j) {
        if (j == face_axis) continue;
        Real lo = best_x[j] - step, hi = best_x[j] + step;
        if (lo < -half) lo = -half;
        if (hi > half) hi = half;
        auto eval = [&](const Real& v) {
          auto x = best_x;
          x[j] = v;
          return gap_at(x);
        };
        Real x1 = hi - phi_inv * (hi - lo), x2 = lo + phi_inv * (hi - lo);
        Real g1 = eval(x1), g2 = eval(x2);
        for (int it = 0; it < 60; ++it) {
          if (g1 < g2) {
            hi = x2; x2 = x1; g2 = g1;
            x1 = hi - phi_inv * (hi - lo);
            g1 = eval(x1);
          } else {
            lo = x1; x1 = x2; g1 = g2;
            x2 = lo + phi_inv * (hi - lo);
            g2 = eval(x2);
          }
        }
        const Real cand_x = g1 < g2 ? x1 : x2;
        const Real cand_g = g1 < g2 ? g1 : g2;
        if (cand_g < best_gap) {
          best_gap = cand_g;
          best_x[j] = cand_x;
        }
      }
    }
  }

  Real ad = Real(1);
  for (int j = 0; j < d; ++j) ad *= a;
  EdgeGap<Real> out{best_gap,
                    Real(3) / ad * exp(Real(-1) / (Real(2) * a * a)),
                    Real(3) / ad * exp(Real(-2) * pi<Real>() * pi<Real>() / (a * a)),
                    best_x};
  return out;
}

}  // namespace gmodes
