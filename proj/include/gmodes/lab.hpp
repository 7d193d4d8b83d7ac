#pragma once

// Experiment sweeps over the lattice constructions, slope fitting, the
// bounds table, SVG plots and CSV/JSON record output.

#include <gmodes/io.hpp>
#include <gmodes/mixture.hpp>
#include <gmodes/modes.hpp>
#include <gmodes/numerics.hpp>
#include <gmodes/theta.hpp>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmodes {

struct SweepRecord {
  int N = 0;
  double A = 0;
  double a = 0;
  int dim = 1;
  long mode_count = 0;
  long certified_count = 0;
  std::optional<double> variance;
  int precision_bits = 53;
  long wall_time_ms = 0;

  friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<std::string> violations;
  std::optional<int> threshold_n0;  // prop2 only
};

struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

/// Picks the arithmetic for one sweep entry: a fixed width when given,
/// otherwise `floor_bits` or required_bits(N), whichever is larger. Widths
/// <= 53 run on hardware doubles.
struct PrecisionPolicy {
  std::optional<int> fixed_bits;
  int floor_bits = 0;

  int bits_for(int n) const {
    if (fixed_bits) return *fixed_bits;
    return std::max(floor_bits, required_bits(n));
  }
};

/// Runs body.template operator()<Real>(ctx) on the backend selected by bits:
/// double for bits <= 53, BigFloat at `bits` otherwise.
template <class Body>
auto with_backend(int bits, Body&& body) {
  if (bits <= 53) return body.template operator()<double>(PrecisionContext::hardware());
  ScopedPrecision scope(bits);
  return body.template operator()<BigFloat>(PrecisionContext::for_bits(bits));
}

namespace detail {

inline long elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return static_cast<long>(
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count());
}

struct Counts {
  long modes;
  long certified;
  int bits;
};

template <class Real>
Counts lattice_counts_1d(const Mixture<Real>& m, const Real& a, const Real& half, const PrecisionContext& ctx) {
  const Interval<Real> region{-half, half};
  const auto scan = count_modes_1d(m, region, a / Real(8), ctx);
  const auto fam = IntervalFamily<Real>::lattice_cells(a, -half, half);
  const auto cert = certified_lower_bound_1d(m, fam, ctx);
  return {static_cast<long>(scan.count), static_cast<long>(cert.count), scan.precision_bits};
}

}  // namespace detail

/// f_{a,N} with a = 2 sqrt(pi/N), counted on S = [-aN/2, aN/2]. Every entry
/// must reach N - 1 modes, both by scan and by certificate.
inline SweepResult run_prop1(const std::vector<int>& ns, const PrecisionPolicy& policy = {}) {
  if (ns.empty()) throw std::invalid_argument("run_prop1: empty N list");
  SweepResult out;
  for (int n : ns) {
    if (n < 2) throw std::invalid_argument("run_prop1: N must be >= 2");
    const auto t0 = std::chrono::steady_clock::now();
    SweepRecord rec;
    rec.N = n;
    rec.dim = 1;
    const auto c = with_backend(policy.bits_for(n), [&]<class Real>(const PrecisionContext& ctx) {
      const Real a = critical_spacing<Real>(n);
      const auto m = make_faN(a, n);
      rec.a = to_double(a);
      rec.A = to_double(a * Real(n));
      return detail::lattice_counts_1d(m, a, a * Real(n) / Real(2), ctx);
    });
    rec.mode_count = c.modes;
    rec.certified_count = c.certified;
    rec.precision_bits = c.bits;
    rec.wall_time_ms = detail::elapsed_ms(t0);
    if (rec.mode_count < n - 1 || rec.certified_count < n - 1)
      out.violations.push_back("prop1 N=" + std::to_string(n) + ": fewer than N-1 modes (scan " +
                               std::to_string(rec.mode_count) + ", certified " +
                               std::to_string(rec.certified_count) + ")");
    out.records.push_back(rec);
  }
  return out;
}

/// Gamma mixture of variance <= 1. The certified count adds the central cell
/// [-a/2, a/2] to the lattice cells inside +-[3 sqrt(pi N), 5 sqrt(pi N)];
/// the scan covers [-A - 6, A + 6]. N0 is the smallest swept N from which
/// every larger swept N reaches 2(N-1)+1 certified modes.
inline SweepResult run_prop2(const std::vector<int>& ns, const PrecisionPolicy& policy = {}) {
  if (ns.empty()) throw std::invalid_argument("run_prop2: empty N list");
  SweepResult out;
  std::vector<int> sorted = ns;
  std::sort(sorted.begin(), sorted.end());
  std::vector<bool> meets;
  for (int n : sorted) {
    if (n < 1) throw std::invalid_argument("run_prop2: N must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();
    SweepRecord rec;
    rec.N = n;
    rec.dim = 1;
    const auto c = with_backend(policy.bits_for(n), [&]<class Real>(const PrecisionContext& ctx) {
      using std::sqrt;
      const Real a = critical_spacing<Real>(n);
      const auto m = make_Gamma<Real>(n);
      const Real big_a = a * Real(3 * n);
      rec.a = to_double(a);
      rec.A = to_double(big_a);
      rec.variance = to_double(mixing_variance(m));
      const auto scan = count_modes_1d(m, Interval<Real>{-big_a - Real(6), big_a + Real(6)}, a / Real(8), ctx);
      const Real root = sqrt(pi<Real>() * Real(n));
      auto fam = IntervalFamily<Real>::lattice_cells(a, -Real(5) * root, -Real(3) * root);
      fam.intervals.push_back({-a / Real(2), a / Real(2)});
      const auto right = IntervalFamily<Real>::lattice_cells(a, Real(3) * root, Real(5) * root);
      fam.intervals.insert(fam.intervals.end(), right.intervals.begin(), right.intervals.end());
      const auto cert = certified_lower_bound_1d(m, fam, ctx);
      return detail::Counts{static_cast<long>(scan.count), static_cast<long>(cert.count), scan.precision_bits};
    });
    rec.mode_count = c.modes;
    rec.certified_count = c.certified;
    rec.precision_bits = c.bits;
    rec.wall_time_ms = detail::elapsed_ms(t0);
    if (*rec.variance > 1.0)
      out.violations.push_back("prop2 N=" + std::to_string(n) + ": mixing variance exceeds 1");
    meets.push_back(rec.certified_count >= 2 * (n - 1) + 1);
    out.records.push_back(rec);
  }
  for (std::size_t i = meets.size(); i-- > 0 && meets[i];) out.threshold_n0 = sorted[i];
  if (!out.threshold_n0) out.violations.push_back("prop2: largest swept N misses 2(N-1)+1 certified modes");
  return out;
}

struct Prop3Options {
  int d = 2;
  std::optional<double> c;       // default 2 sqrt(pi)
  std::optional<double> c_prime;  // default sqrt(pi)
  int oracle_points_per_spacing = 16;
  int min_step_divisor = 8192;  // cube boundary steps halve from a/8 down to a/min_step_divisor
};

/// Lattice of spacing a = c/sqrt(N) in d dimensions, cubes inside
/// [-c' sqrt(N), c' sqrt(N)]^d. certified_count comes from cube certificates,
/// mode_count from the dense-grid oracle on the same box. d = 1 runs the
/// interval version on the same construction.
inline SweepResult run_prop3(const std::vector<int>& ns, const Prop3Options& opt = {},
                             const PrecisionPolicy& policy = {std::nullopt, 128}) {
  if (ns.empty()) throw std::invalid_argument("run_prop3: empty N list");
  if (opt.d < 1 || opt.d > 3) throw std::invalid_argument("run_prop3: d must be 1, 2 or 3");
  if (opt.oracle_points_per_spacing < 1 || opt.min_step_divisor < 8)
    throw std::invalid_argument("run_prop3: invalid oracle or step setting");
  SweepResult out;
  for (int n : ns) {
    if (n < 1) throw std::invalid_argument("run_prop3: N must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();
    SweepRecord rec;
    rec.N = n;
    rec.dim = opt.d;
    long expected = 0;
    const auto c = with_backend(policy.bits_for(n), [&]<class Real>(const PrecisionContext& ctx) {
      using std::ceil;
      using std::floor;
      using std::sqrt;
      const Real cc = opt.c ? Real(*opt.c) : Real(2) * sqrt(pi<Real>());
      const Real cp = opt.c_prime ? Real(*opt.c_prime) : sqrt(pi<Real>());
      if (!(cc > Real(0)) || !(cp > Real(0))) throw std::invalid_argument("run_prop3: c and c' must be positive");
      const Real root = sqrt(Real(n));
      const Real a = cc / root;
      const Real half = cp * root;
      const auto m = make_lattice_d(a, n, opt.d);
      rec.a = to_double(a);
      rec.A = to_double(a * Real(n));
      const long per_axis = std::max(0L, lround(floor(Real(2) * half / a)) - 1);
      expected = 1;
      for (int j = 0; j < opt.d; ++j) expected *= per_axis;
      if (opt.d == 1) return detail::lattice_counts_1d(m, a, half, ctx);

      const auto cubes = lattice_cubes(a, opt.d, half);
      const auto cert =
          count_modes_cube_d_adaptive(m, cubes, a / Real(8), a / Real(opt.min_step_divisor), ctx, CubeSlack::curvature);
      const double hd = to_double(half);
      const int ppu = static_cast<int>(std::ceil(opt.oracle_points_per_spacing / to_double(a)));
      const Box box{std::vector<double>(opt.d, -hd), std::vector<double>(opt.d, hd)};
      const auto oracle = dense_grid_oracle(m, box, ppu, ctx);
      return detail::Counts{static_cast<long>(oracle.count), static_cast<long>(cert.count), cert.precision_bits};
    });
    rec.mode_count = c.modes;
    rec.certified_count = c.certified;
    rec.precision_bits = c.bits;
    rec.wall_time_ms = detail::elapsed_ms(t0);
    const std::string tag = "prop3 d=" + std::to_string(opt.d) + " N=" + std::to_string(n);
    if (rec.certified_count < expected)
      out.violations.push_back(tag + ": certified count " + std::to_string(rec.certified_count) + " below " +
                               std::to_string(expected));
    if (rec.certified_count > rec.mode_count)
      out.violations.push_back(tag + ": oracle found fewer modes than were certified");
    out.records.push_back(rec);
  }
  return out;
}

/// Ordinary least squares of ln(count) on ln(A).
inline SlopeFit fit_power_law(const std::vector<double>& big_a, const std::vector<double>& count) {
  if (big_a.size() != count.size()) throw std::invalid_argument("fit_slope: length mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < big_a.size(); ++i) {
    if (big_a[i] > 0 && count[i] >= 1) {
      xs.push_back(std::log(big_a[i]));
      ys.push_back(std::log(count[i]));
    }
  }
  if (xs.size() < 3) throw std::invalid_argument("fit_slope: fewer than 3 usable records");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("fit_slope: all A values coincide");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

inline SlopeFit fit_slope(const std::vector<SweepRecord>& records) {
  std::vector<double> big_a, count;
  for (const auto& r : records) {
    big_a.push_back(r.A);
    count.push_back(static_cast<double>(r.mode_count));
  }
  return fit_power_law(big_a, count);
}

// ---------------------------------------------------------------- bounds

/// Sampled sup of |f_a - f_{a,N}| over `samples` equally spaced points of
/// [-aN/2, aN/2], evaluated at `bits`.
inline double truncation_sup(double a_in, int n, int samples, int bits) {
  if (samples < 2) throw std::invalid_argument("truncation_sup: need at least 2 samples");
  ScopedPrecision scope(bits);
  const auto ctx = PrecisionContext::for_bits(bits);
  const BigFloat a(a_in);
  const auto m = make_faN(a, n);
  const ThetaSeries<BigFloat> t{a, 1};
  const BigFloat half = a * BigFloat(n) / BigFloat(2);
  BigFloat best(0);
  for (int i = 0; i < samples; ++i) {
    const BigFloat x = -half + BigFloat(2) * half * BigFloat(i) / BigFloat(samples - 1);
    BigFloat diff = abs(theta(t, x, ctx) - density(m, x, ctx));
    if (diff > best) best = diff;
  }
  return to_double(best);
}

struct BoundsRow {
  double a = 0;
  double h_lower = 0;
  double h_exact = 0;
  double h_upper = 0;
  double hbar = 0;
  double theta_residual = 0;
  int trunc_n = 0;
  double trunc_sup = 0;
  double trunc_bound = 0;
  bool violation = false;
};

struct EdgeProxyRow {
  double a = 0;
  int d = 2;
  double gap = 0;
  double proxy = 0;
  double corrected_proxy = 0;
};

struct BoundsReport {
  std::vector<BoundsRow> rows;
  std::vector<EdgeProxyRow> edge_rows;
  // Per dimension: the smallest grid a from which (3/a^d) e^{-1/(2a^2)}
  // stays below the measured center-to-edge gap for every larger grid a.
  std::vector<std::pair<int, std::optional<double>>> proxy_valid_from;
  std::size_t violations = 0;
};

struct BoundsOptions {
  int theta_bits = 128;
  int residual_samples = 64;
  int trunc_samples = 1000;
  double residual_limit = 1e-20;
  std::vector<int> edge_dims{2, 3};
};

/// N paired with a for the truncation columns: the N whose critical spacing
/// 2 sqrt(pi/N) is closest to a.
inline int paired_n(double a) { return std::max(1, static_cast<int>(std::lround(4.0 * M_PI / (a * a)))); }

inline BoundsReport cmd_bounds(const std::vector<double>& grid, const BoundsOptions& opt = {}) {
  if (grid.empty()) throw std::invalid_argument("bounds: empty a grid");
  BoundsReport rep;
  for (double av : grid) {
    if (!(av > 0)) throw std::invalid_argument("bounds: a values must be positive");
    BoundsRow row;
    row.a = av;
    {
      ScopedPrecision scope(opt.theta_bits);
      const auto ctx = PrecisionContext::for_bits(opt.theta_bits);
      const BigFloat a(av);
      const auto hb = h_bounds(a);
      const BigFloat he = h_exact(a, ctx);
      const BigFloat hbar = hbar_exact(a, ctx);
      row.h_lower = to_double(hb.lower);
      row.h_exact = to_double(he);
      row.h_upper = to_double(hb.upper);
      row.hbar = to_double(hbar);
      // hbar is a difference of sampled extremes, so it is compared with one
      // working-precision relative tolerance; the sandwich is compared exactly.
      const BigFloat hbar_limit = hb.upper * (BigFloat(1) + BigFloat(ctx.rel_tol));
      if (!(hb.lower <= he && he <= hb.upper && hbar <= hbar_limit)) row.violation = true;
      const ThetaSeries<BigFloat> t{a, 1};
      BigFloat worst(0);
      for (int i = 0; i < opt.residual_samples; ++i) {
        const BigFloat x = a * BigFloat(i) / BigFloat(opt.residual_samples);
        std::span<const BigFloat> xs(&x, 1);
        BigFloat r = abs(theta_space(t, xs, ctx) - theta_freq(t, xs, ctx));
        if (r > worst) worst = r;
      }
      row.theta_residual = to_double(worst);
      if (row.theta_residual > opt.residual_limit) row.violation = true;
    }
    row.trunc_n = paired_n(av);
    row.trunc_bound = truncation_bound(av, row.trunc_n);
    row.trunc_sup =
        truncation_sup(av, row.trunc_n, opt.trunc_samples, std::max(opt.theta_bits, required_bits(row.trunc_n)));
    if (row.trunc_sup > row.trunc_bound) row.violation = true;
    if (row.violation) ++rep.violations;
    rep.rows.push_back(row);
  }

  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  for (int d : opt.edge_dims) {
    std::optional<double> from;
    for (double av : sorted) {
      ScopedPrecision scope(opt.theta_bits);
      const auto g = theta_d_center_edge_gap(BigFloat(av), d, PrecisionContext::for_bits(opt.theta_bits));
      EdgeProxyRow er{av, d, to_double(g.gap), to_double(g.proxy), to_double(g.corrected_proxy)};
      if (g.gap >= g.proxy) {
        if (!from) from = av;
      } else {
        from.reset();
      }
      rep.edge_rows.push_back(er);
    }
    rep.proxy_valid_from.emplace_back(d, from);
  }
  return rep;
}

/// "lo:hi:step" inclusive of hi up to rounding, or a comma list.
inline std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  auto num = [](const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("bad number '" + s + "'");
    return v;
  };
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw std::invalid_argument("grid must be lo:hi:step");
    const double lo = num(parts[0]), hi = num(parts[1]), step = num(parts[2]);
    if (!(step > 0) || hi < lo) throw std::invalid_argument("grid needs lo <= hi and step > 0");
    const long count = std::lround(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  } else {
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(num(p));
  }
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

// ---------------------------------------------------------------- plots

struct PlotData {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> modes;
  std::string svg;
};

namespace detail {
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double f : {1.0, 2.0, 5.0, 10.0})
    if (f * mag >= raw) return f * mag;
  return 10 * mag;
}
}  // namespace detail

/// Samples density on `samples` equally spaced points of [lo, hi] and renders
/// an SVG. The polyline is written in data coordinates (17 significant
/// digits) under a single affine transform, so its y-values are the density
/// values themselves.
inline PlotData render_density_svg(const Mixture<double>& m, double lo, double hi, int samples) {
  if (m.dim() != 1) throw std::invalid_argument("plot: mixture must be one-dimensional");
  if (samples < 2) throw std::invalid_argument("plot: need at least 2 samples");
  if (!(hi > lo)) throw std::invalid_argument("plot: empty region");
  const auto ctx = PrecisionContext::hardware();
  PlotData out;
  double ymax = 0;
  for (int i = 0; i < samples; ++i) {
    const double x = i + 1 == samples ? hi : lo + (hi - lo) * i / (samples - 1);
    const double y = density(m, x, ctx);
    out.x.push_back(x);
    out.y.push_back(y);
    ymax = std::max(ymax, y);
  }
  if (!(ymax > 0)) ymax = 1;
  ymax *= 1.08;

  std::vector<double> c(m.centers_double());
  std::sort(c.begin(), c.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < c.size(); ++i)
    if (c[i] > c[i - 1]) gap = std::min(gap, c[i] - c[i - 1]);
  const double step = std::isfinite(gap) ? gap / 8 : 0.125;
  for (const auto& loc : count_modes_1d(m, Interval<double>{lo, hi}, step, ctx).locations) out.modes.push_back(loc[0]);

  const double W = 800, H = 450, L = 70, R = 20, T = 20, B = 50;
  const double sx = (W - L - R) / (hi - lo);
  const double sy = (H - T - B) / ymax;
  auto px = [&](double x) { return L + (x - lo) * sx; };
  auto py = [&](double y) { return H - B - y * sy; };
  using detail::fmt17;
  using detail::fmt_short;

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<g id=\"axes\" stroke=\"black\" stroke-width=\"1\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\"/>\n";
  const double xt = detail::nice_step(hi - lo, 8);
  for (double t = std::ceil(lo / xt) * xt; t <= hi + 1e-12 * xt; t += xt) {
    const double p = px(t);
    s << "<line x1=\"" << fmt_short(p) << "\" y1=\"" << H - B << "\" x2=\"" << fmt_short(p) << "\" y2=\""
      << H - B + 5 << "\"/>";
    s << "<text x=\"" << fmt_short(p) << "\" y=\"" << H - B + 20 << "\" text-anchor=\"middle\" stroke=\"none\">"
      << fmt_short(std::fabs(t) < 1e-12 * xt ? 0.0 : t) << "</text>\n";
  }
  const double yt = detail::nice_step(ymax, 5);
  for (double t = 0; t <= ymax; t += yt) {
    const double p = py(t);
    s << "<line x1=\"" << L - 5 << "\" y1=\"" << fmt_short(p) << "\" x2=\"" << L << "\" y2=\"" << fmt_short(p)
      << "\"/>";
    s << "<text x=\"" << L - 8 << "\" y=\"" << fmt_short(p + 4) << "\" text-anchor=\"end\" stroke=\"none\">"
      << fmt_short(t) << "</text>\n";
  }
  s << "</g>\n";
  s << "<g id=\"curve\" transform=\"matrix(" << fmt17(sx) << " 0 0 " << fmt17(-sy) << ' ' << fmt17(L - lo * sx)
    << ' ' << fmt17(H - B) << ")\">\n";
  s << "<polyline id=\"density\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" "
       "vector-effect=\"non-scaling-stroke\" points=\"";
  for (std::size_t i = 0; i < out.x.size(); ++i) s << (i ? " " : "") << fmt17(out.x[i]) << ',' << fmt17(out.y[i]);
  s << "\"/>\n</g>\n";
  s << "<g id=\"modes\" fill=\"#c0392b\">\n";
  for (double x0 : out.modes) {
    const double y0 = density(m, x0, ctx);
    s << "<circle cx=\"" << fmt_short(px(x0)) << "\" cy=\"" << fmt_short(py(y0)) << "\" r=\"3\" data-x=\""
      << fmt17(x0) << "\"/>\n";
  }
  s << "</g>\n</svg>\n";
  out.svg = s.str();
  return out;
}

inline PlotData cmd_plot(const Mixture<double>& m, double lo, double hi, int samples, const std::string& path) {
  auto data = render_density_svg(m, lo, hi, samples);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("plot: cannot open '" + path + "' for writing");
  f << data.svg;
  if (!f.flush()) throw std::runtime_error("plot: write to '" + path + "' failed");
  return data;
}

// ---------------------------------------------------------------- records

inline constexpr const char* kCsvHeader =
    "N,A,a,dim,mode_count,certified_count,variance,precision_bits,wall_time_ms";

inline std::string to_csv_line(const SweepRecord& r) {
  using detail::fmt17;
  return std::to_string(r.N) + ',' + fmt17(r.A) + ',' + fmt17(r.a) + ',' + std::to_string(r.dim) + ',' +
         std::to_string(r.mode_count) + ',' + std::to_string(r.certified_count) + ',' +
         (r.variance ? fmt17(*r.variance) : std::string()) + ',' + std::to_string(r.precision_bits) + ',' +
         std::to_string(r.wall_time_ms);
}

inline void write_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) os << to_csv_line(r) << '\n';
}

inline std::vector<SweepRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw std::invalid_argument("csv: unexpected header");
  std::vector<SweepRecord> out;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1)
      f.push_back(line.substr(start, pos - start));
    f.push_back(line.substr(start));
    if (f.size() != 9) throw std::invalid_argument("csv: expected 9 fields in '" + line + "'");
    SweepRecord r;
    r.N = std::stoi(f[0]);
    r.A = std::stod(f[1]);
    r.a = std::stod(f[2]);
    r.dim = std::stoi(f[3]);
    r.mode_count = std::stol(f[4]);
    r.certified_count = std::stol(f[5]);
    if (!f[6].empty()) r.variance = std::stod(f[6]);
    r.precision_bits = std::stoi(f[7]);
    r.wall_time_ms = std::stol(f[8]);
    out.push_back(r);
  }
  return out;
}

inline nlohmann::json to_json(const SweepRecord& r) {
  nlohmann::json j{{"N", r.N},
                   {"A", r.A},
                   {"a", r.a},
                   {"dim", r.dim},
                   {"mode_count", r.mode_count},
                   {"certified_count", r.certified_count},
                   {"variance", nullptr},
                   {"precision_bits", r.precision_bits},
                   {"wall_time_ms", r.wall_time_ms}};
  if (r.variance) j["variance"] = *r.variance;
  return j;
}

inline SweepRecord sweep_record_from_json(const nlohmann::json& j) {
  SweepRecord r;
  r.N = j.at("N").get<int>();
  r.A = j.at("A").get<double>();
  r.a = j.at("a").get<double>();
  r.dim = j.at("dim").get<int>();
  r.mode_count = j.at("mode_count").get<long>();
  r.certified_count = j.at("certified_count").get<long>();
  if (j.contains("variance") && !j.at("variance").is_null()) r.variance = j.at("variance").get<double>();
  r.precision_bits = j.at("precision_bits").get<int>();
  r.wall_time_ms = j.at("wall_time_ms").get<long>();
  return r;
}

inline nlohmann::json to_json(const SweepResult& res) {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : res.records) recs.push_back(to_json(r));
  nlohmann::json j{{"records", recs}, {"violations", res.violations}};
  if (res.threshold_n0) j["n0"] = *res.threshold_n0;
  return j;
}

inline nlohmann::json to_json(const SlopeFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
}

inline constexpr const char* kBoundsCsvHeader =
    "a,h_lower,h_exact,h_upper,hbar,theta_residual,trunc_N,trunc_sup,trunc_bound,violation";

inline void write_bounds_csv(std::ostream& os, const BoundsReport& rep) {
  using detail::fmt17;
  os << kBoundsCsvHeader << '\n';
  for (const auto& r : rep.rows)
    os << fmt17(r.a) << ',' << fmt17(r.h_lower) << ',' << fmt17(r.h_exact) << ',' << fmt17(r.h_upper) << ','
       << fmt17(r.hbar) << ',' << fmt17(r.theta_residual) << ',' << r.trunc_n << ',' << fmt17(r.trunc_sup) << ','
       << fmt17(r.trunc_bound) << ',' << (r.violation ? 1 : 0) << '\n';
}

inline nlohmann::json to_json(const BoundsReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"a", r.a},
                    {"h_lower", r.h_lower},
                    {"h_exact", r.h_exact},
                    {"h_upper", r.h_upper},
                    {"hbar", r.hbar},
                    {"theta_residual", r.theta_residual},
                    {"trunc_N", r.trunc_n},
                    {"trunc_sup", r.trunc_sup},
                    {"trunc_bound", r.trunc_bound},
                    {"violation", r.violation}});
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : rep.edge_rows)
    edges.push_back({{"a", e.a},
                     {"d", e.d},
                     {"gap", e.gap},
                     {"proxy", e.proxy},
                     {"corrected_proxy", e.corrected_proxy}});
  nlohmann::json limits = nlohmann::json::object();
  for (const auto& [d, from] : rep.proxy_valid_from)
    limits[std::to_string(d)] = from ? nlohmann::json(*from) : nlohmann::json(nullptr);
  return {{"rows", rows}, {"edge_gap", edges}, {"proxy_valid_from", limits}, {"violations", rep.violations}};
}

}  // namespace gmodes
