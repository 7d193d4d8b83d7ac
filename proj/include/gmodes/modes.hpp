#pragma once

// Mode (local maximum) counting for Gaussian mixture densities.
//
//  * count_modes_1d: gradient sign scan plus bisection. Exact at the working
//    precision, not a proof.
//  * certified_lower_bound_1d: for disjoint intervals, a density whose
//    midpoint value beats both endpoints has an interior local maximum, so the
//    number of such intervals is a lower bound on the mode count.
//  * count_modes_cube_d: the same argument on disjoint cubes, where the
//    boundary maximum is bounded from finitely many samples plus a slack
//    term (first-order Lipschitz or second-order curvature).
//  * dense_grid_oracle: brute-force strict local maxima on a grid, used to
//    cross-check the others.

#include <gmodes/mixture.hpp>
#include <gmodes/numerics.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstddef>
#include <deque>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmodes {

enum class ModeMethod { sign_change, interval_certificate, cube_certificate, dense_grid_oracle };

inline const char* to_string(ModeMethod m) {
  switch (m) {
    case ModeMethod::sign_change: return "sign_change";
    case ModeMethod::interval_certificate: return "interval_certificate";
    case ModeMethod::cube_certificate: return "cube_certificate";
    case ModeMethod::dense_grid_oracle: return "dense_grid_oracle";
  }
  return "unknown";
}

inline ModeMethod mode_method_from_string(const std::string& s) {
  if (s == "sign_change") return ModeMethod::sign_change;
  if (s == "interval_certificate") return ModeMethod::interval_certificate;
  if (s == "cube_certificate") return ModeMethod::cube_certificate;
  if (s == "dense_grid_oracle") return ModeMethod::dense_grid_oracle;
  throw std::invalid_argument("unknown mode method '" + s + "'");
}

/// Axis-aligned box, stored in double for reporting.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  bool strictly_contains(std::span<const double> x) const {
    for (std::size_t j = 0; j < lo.size(); ++j)
      if (!(x[j] > lo[j] && x[j] < hi[j])) return false;
    return true;
  }
  friend bool operator==(const Box&, const Box&) = default;
};

struct ModeReport {
  std::size_t count = 0;
  std::vector<std::vector<double>> locations;
  bool certified = false;
  ModeMethod method = ModeMethod::sign_change;
  int precision_bits = 53;
  Box search_region;

  friend bool operator==(const ModeReport&, const ModeReport&) = default;
};

template <class Real>
struct Interval {
  Real lo;
  Real hi;
};

template <class Real>
struct IntervalFamily {
  std::vector<Interval<Real>> intervals;

  /// Every lattice cell [n a - a/2, n a + a/2] contained in [lo, hi]. A cell
  /// whose end misses [lo, hi] by a few ulps counts as contained, so
  /// S = [-aN/2, aN/2] keeps its outer cells however aN/2 was rounded.
  static IntervalFamily lattice_cells(const Real& a, const Real& lo, const Real& hi) {
    using std::ceil;
    using std::floor;
    using std::ldexp;
    if (!(a > Real(0))) throw std::invalid_argument("lattice_cells: a must be positive");
    using std::abs;
    int p = 53;
    if constexpr (is_big_v<Real>) p = a.precision();
    Real scale = a;
    if (abs(lo) > scale) scale = abs(lo);
    if (abs(hi) > scale) scale = abs(hi);
    const Real slack = ldexp(scale, -(p - 4));
    IntervalFamily fam;
    const Real half = a / Real(2);
    const long first = lround(ceil((lo - slack + half) / a));
    const long last = lround(floor((hi + slack - half) / a));
    for (long n = first; n <= last; ++n) {
      // Shared endpoints are computed by one expression so neighbours touch exactly.
      Interval<Real> iv{half * Real(2 * n - 1), half * Real(2 * n + 1)};
      if (iv.lo >= lo - slack && iv.hi <= hi + slack) fam.intervals.push_back(std::move(iv));
    }
    return fam;
  }
};

template <class Real>
struct Cube {
  std::vector<Real> center;
  Real half_width;
};

/// Lattice cells n a + [-a/2, a/2]^d contained in [-bound, bound]^d.
template <class Real>
std::vector<Cube<Real>> lattice_cubes(const Real& a, int d, const Real& bound) {
  auto line = IntervalFamily<Real>::lattice_cells(a, -bound, bound);
  std::vector<Real> centers;
  for (const auto& iv : line.intervals) centers.push_back((iv.lo + iv.hi) / Real(2));
  std::vector<Cube<Real>> cubes;
  if (centers.empty()) return cubes;
  const std::size_t side = centers.size();
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) total *= side;
  for (std::size_t k = 0; k < total; ++k) {
    Cube<Real> c{std::vector<Real>(d), a / Real(2)};
    std::size_t rem = k;
    for (int j = d - 1; j >= 0; --j) {
      c.center[j] = centers[rem % side];
      rem /= side;
    }
    cubes.push_back(std::move(c));
  }
  return cubes;
}

namespace detail {

template <class Real>
int sign_of(const Real& v) {
  if (v > Real(0)) return 1;
  if (v < Real(0)) return -1;
  return 0;
}

/// Effective mantissa width of the arithmetic actually used.
template <class Real>
int effective_bits(const PrecisionContext& ctx) {
  if constexpr (is_big_v<Real>) return ctx.mantissa_bits;
  else return 53;
}

template <class Real>
void check_grid_step_1d(const Mixture<Real>& m, const Real& step) {
  std::vector<double> c;
  for (const auto& v : m.centers()) c.push_back(to_double(v));
  std::sort(c.begin(), c.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < c.size(); ++i)
    if (c[i] > c[i - 1]) gap = std::min(gap, c[i] - c[i - 1]);
  const double limit = std::isfinite(gap) ? gap / 8 : 0.125;
  if (to_double(step) > limit * (1 + 1e-9))
    throw std::invalid_argument("count_modes_1d: grid_step exceeds (min center gap)/8");
}

}  // namespace detail

/// Local maxima and minima found by one gradient scan.
struct CriticalScan {
  ModeReport maxima;
  std::vector<double> minima;
};

/// Scans the derivative on lo, lo + step, ..., hi and refines every sign
/// change by bisection to width step * 1e-6. Maxima are + to - changes,
/// minima - to +.
template <class Real>
CriticalScan scan_critical_points_1d(const Mixture<Real>& m, const Interval<Real>& region, const Real& grid_step,
                                     const PrecisionContext& ctx) {
  using std::ceil;
  PrecisionScope<Real> scope(ctx);
  if (m.dim() != 1) throw std::invalid_argument("count_modes_1d: mixture must be one-dimensional");
  if (!(region.hi > region.lo)) throw std::invalid_argument("count_modes_1d: empty region");
  if (!(grid_step > Real(0))) throw std::invalid_argument("count_modes_1d: grid_step must be positive");
  detail::check_grid_step_1d(m, grid_step);

  const long steps = lround(ceil((region.hi - region.lo) / grid_step));
  auto grid = [&](long i) { return i >= steps ? region.hi : region.lo + grid_step * Real(i); };
  auto deriv = [&](const Real& x) { return density_derivative(m, x, ctx); };
  const Real tol = grid_step * Real(1e-6);

  auto refine = [&](Real l, Real r, int left_sign) {
    while (r - l > tol) {
      Real mid = (l + r) / Real(2);
      const int s = detail::sign_of(deriv(mid));
      if (s == 0) return mid;
      if (s == left_sign) l = std::move(mid);
      else r = std::move(mid);
    }
    return Real((l + r) / Real(2));
  };

  CriticalScan out;
  out.maxima.method = ModeMethod::sign_change;
  out.maxima.certified = false;
  out.maxima.precision_bits = detail::effective_bits<Real>(ctx);
  out.maxima.search_region = Box{{to_double(region.lo)}, {to_double(region.hi)}};

  int prev_sign = 0;
  Real prev_x = region.lo;
  for (long i = 0; i <= steps; ++i) {
    Real x = grid(i);
    const int s = detail::sign_of(deriv(x));
    if (s == 0) continue;
    if (prev_sign == 1 && s == -1) {
      out.maxima.locations.push_back({to_double(refine(prev_x, x, 1))});
    } else if (prev_sign == -1 && s == 1) {
      out.minima.push_back(to_double(refine(prev_x, x, -1)));
    }
    prev_sign = s;
    prev_x = std::move(x);
  }
  out.maxima.count = out.maxima.locations.size();
  return out;
}

template <class Real>
ModeReport count_modes_1d(const Mixture<Real>& m, const Interval<Real>& region, const Real& grid_step,
                          const PrecisionContext& ctx) {
  return scan_critical_points_1d(m, region, grid_step, ctx).maxima;
}

/// Counts the intervals whose midpoint density exceeds both endpoint
/// densities by more than 2^{-(bits-32)} times the midpoint density.
template <class Real>
ModeReport certified_lower_bound_1d(const Mixture<Real>& m, const IntervalFamily<Real>& fam,
                                    const PrecisionContext& ctx) {
  using std::ldexp;
  PrecisionScope<Real> scope(ctx);
  if (m.dim() != 1) throw std::invalid_argument("certified_lower_bound_1d: mixture must be one-dimensional");
  std::vector<std::size_t> order(fam.intervals.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return fam.intervals[i].lo < fam.intervals[j].lo; });
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& iv = fam.intervals[order[i]];
    if (!(iv.hi > iv.lo)) throw std::invalid_argument("certified_lower_bound_1d: empty interval");
    if (i > 0 && iv.lo < fam.intervals[order[i - 1]].hi)
      throw std::invalid_argument("certified_lower_bound_1d: intervals overlap");
  }

  const int bits = detail::effective_bits<Real>(ctx);
  ModeReport out;
  out.method = ModeMethod::interval_certificate;
  out.certified = true;
  out.precision_bits = bits;
  if (!order.empty()) {
    out.search_region = Box{{to_double(fam.intervals[order.front()].lo)},
                            {to_double(fam.intervals[order.back()].hi)}};
  } else {
    out.search_region = Box{{0.0}, {0.0}};
  }
  for (std::size_t i : order) {
    const auto& iv = fam.intervals[i];
    const Real c = (iv.lo + iv.hi) / Real(2);
    const Real fc = density(m, c, ctx);
    Real edge = density(m, iv.lo, ctx);
    Real fr = density(m, iv.hi, ctx);
    if (fr > edge) edge = fr;
    const Real margin = ldexp(fc, -(bits - 32));
    if (fc - edge > margin) out.locations.push_back({to_double(c)});
  }
  out.count = out.locations.size();
  return out;
}

/// (sum_k w_k) e^{-1/2} (2 pi)^{-d/2}: a global bound on |grad density|_2,
/// since |r| phi_d(r) peaks at |r| = 1.
template <class Real>
Real lipschitz_bound(const Mixture<Real>& m) {
  using std::exp;
  return m.weight_sum() * exp(Real(-0.5)) * m.normalizer();
}

enum class CubeSlack { lipschitz, curvature };
enum class CubeVerdict { certified, not_certified, too_coarse };

template <class Real>
struct CubeCertificate {
  CubeVerdict verdict = CubeVerdict::not_certified;
  Real center_value;
  Real boundary_bound;  // certified upper bound on the boundary maximum
};

namespace detail {

/// sup over r in [r_min, r_max] of max(1, r^2 - 1) e^{-r^2/2}, which bounds
/// the spectral norm of the Hessian of a unit Gaussian at distance r.
inline double hessian_profile_sup(double r_min, double r_max) {
  auto g = [](double r) { return std::max(1.0, r * r - 1.0) * std::exp(-0.5 * r * r); };
  double best = std::max(g(r_min), g(r_max));
  const double peak = std::sqrt(3.0);
  if (r_min <= peak && peak <= r_max) best = std::max(best, g(peak));
  return best;
}

/// Bound on the Hessian norm of the mixture density over an axis-aligned box.
template <class Real>
double hessian_bound_on_box(const Mixture<Real>& m, std::span<const double> lo, std::span<const double> hi) {
  const int d = m.dim();
  const auto& cd = m.centers_double();
  double total = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    double near2 = 0, far2 = 0;
    for (int j = 0; j < d; ++j) {
      const double c = cd[k * d + j];
      const double dn = c < lo[j] ? lo[j] - c : (c > hi[j] ? c - hi[j] : 0.0);
      const double df = std::max(std::fabs(c - lo[j]), std::fabs(c - hi[j]));
      near2 += dn * dn;
      far2 += df * df;
    }
    total += to_double(m.weight(k)) * hessian_profile_sup(std::sqrt(near2), std::sqrt(far2));
  }
  return total * to_double(m.normalizer()) * (1 + 1e-9);
}

}  // namespace detail

/// Certificate for one cube c + [-w, w]^d. Every face is sampled on a grid of
/// pitch <= boundary_step; the boundary maximum is bounded by the largest
/// sample plus a slack covering unsampled points:
///   lipschitz: L * boundary_step * sqrt(d) / 2 with L = lipschitz_bound(m);
///   curvature: |tangential grad f(s)| rho + H rho^2 / 2 per sample, where
///              rho is the distance to the nearest sample within the face and
///              H bounds the Hessian norm over that face.
/// The cube is certified when f(c) minus the 2^{-(bits-32)} f(c) margin
/// strictly exceeds that bound.
template <class Real>
CubeCertificate<Real> certify_cube(const Mixture<Real>& m, const Cube<Real>& cube, const Real& boundary_step,
                                   const PrecisionContext& ctx, CubeSlack slack = CubeSlack::lipschitz) {
  using std::ceil;
  using std::ldexp;
  using std::sqrt;
  PrecisionScope<Real> scope(ctx);
  const int d = m.dim();
  if (static_cast<int>(cube.center.size()) != d)
    throw std::invalid_argument("certify_cube: cube dimension does not match mixture");
  if (!(boundary_step > Real(0))) throw std::invalid_argument("certify_cube: boundary_step must be positive");
  const int bits = detail::effective_bits<Real>(ctx);
  const Real& w = cube.half_width;

  CubeCertificate<Real> out;
  out.center_value = density(m, std::span<const Real>(cube.center), ctx);
  const Real margin = ldexp(out.center_value, -(bits - 32));
  const Real threshold = out.center_value - margin;

  const long per_axis = std::max(1L, lround(ceil(Real(2) * w / boundary_step)));
  const Real pitch = Real(2) * w / Real(per_axis);
  const int free_dims = d - 1;
  const double rho = to_double(pitch) * std::sqrt(double(std::max(free_dims, 1))) / 2.0;

  Real lip_slack(0);
  if (slack == CubeSlack::lipschitz) {
    lip_slack = lipschitz_bound(m) * boundary_step * sqrt(Real(d)) / Real(2);
    if (lip_slack >= out.center_value) {
      out.verdict = CubeVerdict::too_coarse;
      out.boundary_bound = out.center_value + lip_slack;
      return out;
    }
  }

  long face_points = 1;
  for (int k = 0; k < free_dims; ++k) face_points *= per_axis + 1;

  bool have = false;
  Real bound(0);
  std::vector<Real> x(d);
  std::vector<double> lo(d), hi(d);
  for (int axis = 0; axis < d; ++axis) {
    for (int side = -1; side <= 1; side += 2) {
      double hess = 0.0;
      if (slack == CubeSlack::curvature) {
        for (int j = 0; j < d; ++j) {
          lo[j] = to_double(cube.center[j] - w);
          hi[j] = to_double(cube.center[j] + w);
        }
        const double fixed = to_double(side > 0 ? cube.center[axis] + w : cube.center[axis] - w);
        lo[axis] = hi[axis] = fixed;
        hess = detail::hessian_bound_on_box(m, lo, hi);
      }
      for (long p = 0; p < face_points; ++p) {
        long rem = p;
        for (int j = 0; j < d; ++j) {
          if (j == axis) {
            x[j] = side > 0 ? cube.center[j] + w : cube.center[j] - w;
          } else {
            const long idx = rem % (per_axis + 1);
            rem /= per_axis + 1;
            x[j] = cube.center[j] - w + pitch * Real(idx);
          }
        }
        Real val;
        if (slack == CubeSlack::curvature) {
          auto jet = density_jet(m, std::span<const Real>(x), ctx);
          double tangential2 = 0.0;
          for (int j = 0; j < d; ++j) {
            if (j == axis) continue;
            const double gj = to_double(jet.gradient[j]);
            tangential2 += gj * gj;
          }
          const double s = std::sqrt(tangential2) * rho * (1 + 1e-9) + 0.5 * hess * rho * rho;
          val = jet.value + Real(s);
        } else {
          val = density(m, std::span<const Real>(x), ctx) + lip_slack;
        }
        if (!have || val > bound) {
          bound = val;
          have = true;
        }
        if (!(threshold > bound)) {
          out.boundary_bound = bound;
          out.verdict = CubeVerdict::not_certified;
          return out;
        }
      }
    }
  }
  out.boundary_bound = bound;
  out.verdict = CubeVerdict::certified;
  return out;
}

namespace detail {
template <class Real>
void check_cubes(const std::vector<Cube<Real>>& cubes, int d) {
  for (const auto& c : cubes) {
    if (static_cast<int>(c.center.size()) != d)
      throw std::invalid_argument("count_modes_cube_d: cube dimension does not match mixture");
    if (!(c.half_width > Real(0))) throw std::invalid_argument("count_modes_cube_d: cube half width must be positive");
  }
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    for (std::size_t k = i + 1; k < cubes.size(); ++k) {
      bool overlap = true;
      for (int j = 0; j < d && overlap; ++j) {
        using std::abs;
        overlap = abs(cubes[i].center[j] - cubes[k].center[j]) < cubes[i].half_width + cubes[k].half_width;
      }
      if (overlap) throw std::invalid_argument("count_modes_cube_d: cubes overlap");
    }
  }
}

template <class Real>
ModeReport cube_report(const std::vector<Cube<Real>>& cubes, const std::vector<CubeVerdict>& verdicts, int d,
                       int bits) {
  ModeReport out;
  out.method = ModeMethod::cube_certificate;
  out.certified = true;
  out.precision_bits = bits;
  out.search_region = Box{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    for (int j = 0; j < d; ++j) {
      const double lo = to_double(cubes[i].center[j] - cubes[i].half_width);
      const double hi = to_double(cubes[i].center[j] + cubes[i].half_width);
      if (i == 0 || lo < out.search_region.lo[j]) out.search_region.lo[j] = lo;
      if (i == 0 || hi > out.search_region.hi[j]) out.search_region.hi[j] = hi;
    }
    if (verdicts[i] != CubeVerdict::certified) continue;
    std::vector<double> loc(d);
    for (int j = 0; j < d; ++j) loc[j] = to_double(cubes[i].center[j]);
    out.locations.push_back(std::move(loc));
  }
  std::sort(out.locations.begin(), out.locations.end());
  out.count = out.locations.size();
  return out;
}
}  // namespace detail

/// Lower bound on the number of local maxima: the number of disjoint cubes
/// whose center beats their whole boundary (see certify_cube). Cubes whose
/// slack swamps the center value are rejected and contribute 0; their
/// verdicts are reported through `verdicts` when supplied.
template <class Real>
ModeReport count_modes_cube_d(const Mixture<Real>& m, const std::vector<Cube<Real>>& cubes, const Real& boundary_step,
                              const PrecisionContext& ctx, CubeSlack slack = CubeSlack::lipschitz,
                              std::vector<CubeVerdict>* verdicts = nullptr) {
  PrecisionScope<Real> scope(ctx);
  const int d = m.dim();
  if (d < 2 || d > 3) throw std::invalid_argument("count_modes_cube_d: d must be 2 or 3");
  detail::check_cubes(cubes, d);
  for (const auto& c : cubes)
    if (boundary_step > c.half_width / Real(4))
      throw std::invalid_argument("count_modes_cube_d: boundary_step exceeds a/8");
  std::vector<CubeVerdict> v;
  v.reserve(cubes.size());
  for (const auto& c : cubes) v.push_back(certify_cube(m, c, boundary_step, ctx, slack).verdict);
  auto report = detail::cube_report(cubes, v, d, detail::effective_bits<Real>(ctx));
  if (verdicts) *verdicts = std::move(v);
  return report;
}

/// count_modes_cube_d with per-cube step halving: cubes not certified at
/// `initial_step` are retried at half the step until `min_step`.
template <class Real>
ModeReport count_modes_cube_d_adaptive(const Mixture<Real>& m, const std::vector<Cube<Real>>& cubes,
                                       const Real& initial_step, const Real& min_step, const PrecisionContext& ctx,
                                       CubeSlack slack = CubeSlack::curvature) {
  PrecisionScope<Real> scope(ctx);
  const int d = m.dim();
  if (d < 2 || d > 3) throw std::invalid_argument("count_modes_cube_d: d must be 2 or 3");
  detail::check_cubes(cubes, d);
  std::vector<CubeVerdict> v(cubes.size(), CubeVerdict::not_certified);
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    for (Real step = initial_step; step >= min_step; step /= Real(2)) {
      v[i] = certify_cube(m, cubes[i], step, ctx, slack).verdict;
      if (v[i] != CubeVerdict::not_certified) break;
    }
  }
  return detail::cube_report(cubes, v, d, detail::effective_bits<Real>(ctx));
}

inline constexpr std::size_t kMaxOracleGridPoints = 100'000'000;

/// Grid points (spacing 1/points_per_unit) whose density strictly exceeds
/// every one of their 3^d - 1 neighbours; adjacent marks are merged and
/// reported at their mean position. Boundary grid points are never marked.
template <class Real>
ModeReport dense_grid_oracle(const Mixture<Real>& m, const Box& region, int points_per_unit,
                             const PrecisionContext& ctx) {
  PrecisionScope<Real> scope(ctx);
  const int d = m.dim();
  if (static_cast<int>(region.lo.size()) != d || static_cast<int>(region.hi.size()) != d)
    throw std::invalid_argument("dense_grid_oracle: region dimension does not match mixture");
  if (points_per_unit < 1) throw std::invalid_argument("dense_grid_oracle: points_per_unit must be positive");
  std::vector<std::size_t> n(d);
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) {
    if (!(region.hi[j] > region.lo[j])) throw std::invalid_argument("dense_grid_oracle: empty region");
    n[j] = static_cast<std::size_t>(std::floor((region.hi[j] - region.lo[j]) * points_per_unit + 1e-9)) + 1;
    total *= n[j];
    if (total > kMaxOracleGridPoints) throw std::invalid_argument("dense_grid_oracle: grid exceeds 1e8 points");
  }
  const Real inv = Real(1) / Real(points_per_unit);
  auto coord = [&](int j, std::size_t i) { return Real(region.lo[j]) + Real(static_cast<long>(i)) * inv; };
  auto unflatten = [&](std::size_t k, std::vector<std::size_t>& idx) {
    for (int j = d - 1; j >= 0; --j) {
      idx[j] = k % n[j];
      k /= n[j];
    }
  };

  std::vector<Real> values;
  values.reserve(total);
  std::vector<std::size_t> idx(d);
  std::vector<Real> x(d);
  for (std::size_t k = 0; k < total; ++k) {
    unflatten(k, idx);
    for (int j = 0; j < d; ++j) x[j] = coord(j, idx[j]);
    values.push_back(density(m, std::span<const Real>(x), ctx));
  }

  // Neighbour offsets in {-1,0,1}^d minus the origin.
  std::vector<std::vector<int>> offsets;
  const int combos = static_cast<int>(std::pow(3, d));
  for (int c = 0; c < combos; ++c) {
    std::vector<int> o(d);
    int rem = c;
    bool zero = true;
    for (int j = 0; j < d; ++j) {
      o[j] = rem % 3 - 1;
      rem /= 3;
      zero = zero && o[j] == 0;
    }
    if (!zero) offsets.push_back(std::move(o));
  }
  std::vector<std::size_t> stride(d, 1);
  for (int j = d - 2; j >= 0; --j) stride[j] = stride[j + 1] * n[j + 1];

  std::vector<char> mark(total, 0);
  for (std::size_t k = 0; k < total; ++k) {
    unflatten(k, idx);
    bool interior = true;
    for (int j = 0; j < d; ++j) interior = interior && idx[j] > 0 && idx[j] + 1 < n[j];
    if (!interior) continue;
    bool strict = true;
    for (const auto& o : offsets) {
      std::ptrdiff_t nb = static_cast<std::ptrdiff_t>(k);
      for (int j = 0; j < d; ++j) nb += o[j] * static_cast<std::ptrdiff_t>(stride[j]);
      if (!(values[k] > values[static_cast<std::size_t>(nb)])) {
        strict = false;
        break;
      }
    }
    mark[k] = strict;
  }

  ModeReport out;
  out.method = ModeMethod::dense_grid_oracle;
  out.certified = false;
  out.precision_bits = detail::effective_bits<Real>(ctx);
  out.search_region = region;
  std::vector<char> seen(total, 0);
  for (std::size_t k = 0; k < total; ++k) {
    if (!mark[k] || seen[k]) continue;
    std::vector<double> sum(d, 0.0);
    std::size_t members = 0;
    std::deque<std::size_t> queue{k};
    seen[k] = 1;
    while (!queue.empty()) {
      const std::size_t cur = queue.front();
      queue.pop_front();
      ++members;
      std::vector<std::size_t> ci(d);
      unflatten(cur, ci);
      for (int j = 0; j < d; ++j) sum[j] += region.lo[j] + static_cast<double>(ci[j]) / points_per_unit;
      for (const auto& o : offsets) {
        bool inside = true;
        std::size_t nb = 0;
        for (int j = 0; j < d && inside; ++j) {
          const long v = static_cast<long>(ci[j]) + o[j];
          inside = v >= 0 && v < static_cast<long>(n[j]);
          nb += static_cast<std::size_t>(v) * stride[j];
        }
        if (inside && mark[nb] && !seen[nb]) {
          seen[nb] = 1;
          queue.push_back(nb);
        }
      }
    }
    for (auto& s : sum) s /= static_cast<double>(members);
    out.locations.push_back(std::move(sum));
  }
  out.count = out.locations.size();
  return out;
}

}  // namespace gmodes
