#pragma once

// Finite Gaussian mixtures with identity covariance, the lattice
// constructions built from them, and their density / gradient evaluation.

#include <gmodes/numerics.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace gmodes {

/// l-infinity bound |a_k| <= half_width on every center.
template <class Real>
struct BoundBox {
  Real half_width;
};

template <class Real>
class Mixture {
 public:
  /// `centers` is row-major: component k occupies [k*dim, (k+1)*dim).
  Mixture(int dim, std::vector<Real> centers, std::vector<Real> weights, bool normalized,
          std::optional<BoundBox<Real>> bound = std::nullopt)
      : dim_(dim),
        centers_(std::move(centers)),
        weights_(std::move(weights)),
        normalized_(normalized),
        bound_(std::move(bound)) {
    if (dim_ < 1) throw std::invalid_argument("Mixture: dim must be positive");
    if (weights_.empty()) throw std::invalid_argument("Mixture: at least one component required");
    if (centers_.size() != weights_.size() * static_cast<std::size_t>(dim_))
      throw std::invalid_argument("Mixture: centers and weights differ in length");
    for (const auto& w : weights_)
      if (!(w > Real(0))) throw std::invalid_argument("Mixture: weights must be strictly positive");
    if (normalized_) {
      CompensatedAccumulator<Real> acc;
      for (const auto& w : weights_) acc.add(w);
      const double s = to_double(acc.value());
      if (std::fabs(s - 1.0) > 1e-12) throw std::invalid_argument("Mixture: normalized weights do not sum to 1");
    }
    if (bound_) {
      const double lim = to_double(bound_->half_width);
      for (const auto& c : centers_) {
        if (std::fabs(to_double(c)) > lim * (1 + 1e-12) + 1e-300)
          throw std::invalid_argument("Mixture: center outside its BoundBox");
      }
    }
    Real two_pi = Real(2) * pi<Real>();
    norm_ = Real(1);
    for (int j = 0; j < dim_; ++j) norm_ /= two_pi;
    using std::sqrt;
    norm_ = sqrt(norm_);
    centers_d_.reserve(centers_.size());
    for (const auto& c : centers_) centers_d_.push_back(to_double(c));
  }

  int dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  bool normalized() const { return normalized_; }
  const std::vector<Real>& centers() const { return centers_; }
  const std::vector<Real>& weights() const { return weights_; }
  std::span<const Real> center(std::size_t k) const {
    return std::span<const Real>(centers_).subspan(k * dim_, dim_);
  }
  const Real& weight(std::size_t k) const { return weights_[k]; }
  const std::optional<BoundBox<Real>>& bound_box() const { return bound_; }

  /// (2 pi)^{-d/2}, the peak of a unit-weight component.
  const Real& normalizer() const { return norm_; }
  /// Centers rounded to double; used only for cheap tail screening.
  const std::vector<double>& centers_double() const { return centers_d_; }

  Real weight_sum() const {
    CompensatedAccumulator<Real> acc;
    for (const auto& w : weights_) acc.add(w);
    return acc.value();
  }

  /// max_k |a_k|_inf
  Real max_abs_center() const {
    using std::abs;
    Real best(0);
    for (const auto& c : centers_) {
      Real v = abs(c);
      if (v > best) best = v;
    }
    return best;
  }

  /// Same centers with every weight multiplied by `factor` (unnormalized).
  Mixture scaled(const Real& factor) const {
    std::vector<Real> w = weights_;
    for (auto& x : w) x *= factor;
    return Mixture(dim_, centers_, std::move(w), false, bound_);
  }

 private:
  int dim_;
  std::vector<Real> centers_;
  std::vector<Real> weights_;
  bool normalized_;
  std::optional<BoundBox<Real>> bound_;
  Real norm_;
  std::vector<double> centers_d_;
};

// ---------------------------------------------------------------------------
// Constructions

namespace detail {
template <class Real>
std::vector<Real> lattice_line(const Real& a, int n_lo, int n_hi) {
  std::vector<Real> out;
  out.reserve(static_cast<std::size_t>(n_hi - n_lo + 1));
  for (int n = n_lo; n <= n_hi; ++n) out.push_back(a * Real(n));
  return out;
}

template <class Real>
void require_positive_spacing(const Real& a, const char* who) {
  if (!(a > Real(0))) throw std::invalid_argument(std::string(who) + ": spacing a must be positive");
}
}  // namespace detail

/// Equal-weight mixture with centers a*n, -N <= n <= N, weights 1/(2N+1).
template <class Real>
Mixture<Real> make_gamma(const Real& a, int n) {
  detail::require_positive_spacing(a, "make_gamma");
  if (n < 0) throw std::invalid_argument("make_gamma: N must be nonnegative");
  auto centers = detail::lattice_line(a, -n, n);
  const Real w = Real(1) / Real(2 * n + 1);
  std::vector<Real> weights(centers.size(), w);
  return Mixture<Real>(1, std::move(centers), std::move(weights), true, BoundBox<Real>{a * Real(n)});
}

/// f_{a,N}: the same centers as make_gamma with unit weights.
template <class Real>
Mixture<Real> make_faN(const Real& a, int n) {
  detail::require_positive_spacing(a, "make_faN");
  if (n < 0) throw std::invalid_argument("make_faN: N must be nonnegative");
  auto centers = detail::lattice_line(a, -n, n);
  std::vector<Real> weights(centers.size(), Real(1));
  return Mixture<Real>(1, std::move(centers), std::move(weights), false, BoundBox<Real>{a * Real(n)});
}

/// The spacing 2 sqrt(pi) / sqrt(N) used by the one-dimensional constructions.
template <class Real>
Real critical_spacing(int n) {
  using std::sqrt;
  if (n < 1) throw std::invalid_argument("critical_spacing: N must be >= 1");
  return Real(2) * sqrt(pi<Real>()) / sqrt(Real(n));
}

/// Mixing weight 1/(12 pi (3N+1)) that keeps the mixing variance <= 1.
template <class Real>
Real default_gamma_alpha(int n) {
  return Real(1) / (Real(12) * pi<Real>() * Real(3 * n + 1));
}

/// Variance-constrained mixture: weight 1-2alpha at 0 and alpha/(2N+1) at
/// each a*n with N <= |n| <= 3N, where a = 2 sqrt(pi/N).
template <class Real>
Mixture<Real> make_Gamma(int n, std::optional<Real> alpha = std::nullopt) {
  if (n < 1) throw std::invalid_argument("make_Gamma: N must be >= 1");
  const Real al = alpha ? *alpha : default_gamma_alpha<Real>(n);
  if (!(al > Real(0)) || !(al < Real(0.5)))
    throw std::invalid_argument("make_Gamma: alpha must lie in (0, 1/2)");
  const Real a = critical_spacing<Real>(n);
  const Real outer = al / Real(2 * n + 1);
  std::vector<Real> centers;
  std::vector<Real> weights;
  centers.reserve(4 * n + 3);
  weights.reserve(4 * n + 3);
  for (int k = -3 * n; k <= -n; ++k) {
    centers.push_back(a * Real(k));
    weights.push_back(outer);
  }
  centers.push_back(Real(0));
  weights.push_back(Real(1) - Real(2) * al);
  for (int k = n; k <= 3 * n; ++k) {
    centers.push_back(a * Real(k));
    weights.push_back(outer);
  }
  return Mixture<Real>(1, std::move(centers), std::move(weights), true, BoundBox<Real>{a * Real(3 * n)});
}

inline constexpr std::size_t kMaxLatticeComponents = 10'000'000;

/// Unit-weight components at a*n for n in {-N..N}^d, last coordinate fastest.
template <class Real>
Mixture<Real> make_lattice_d(const Real& a, int n, int d) {
  detail::require_positive_spacing(a, "make_lattice_d");
  if (n < 0) throw std::invalid_argument("make_lattice_d: N must be nonnegative");
  if (d < 1 || d > 3) throw std::invalid_argument("make_lattice_d: d must be 1, 2 or 3");
  const std::size_t side = static_cast<std::size_t>(2 * n + 1);
  std::size_t count = 1;
  for (int j = 0; j < d; ++j) {
    count *= side;
    if (count > kMaxLatticeComponents)
      throw std::invalid_argument("make_lattice_d: more than 1e7 components requested");
  }
  const auto line = detail::lattice_line(a, -n, n);
  std::vector<Real> centers;
  centers.reserve(count * d);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t rem = k;
    for (int j = d - 1; j >= 0; --j) {
      idx[j] = rem % side;
      rem /= side;
    }
    for (int j = 0; j < d; ++j) centers.push_back(line[idx[j]]);
  }
  std::vector<Real> weights(count, Real(1));
  return Mixture<Real>(d, std::move(centers), std::move(weights), false, BoundBox<Real>{a * Real(n)});
}

// ---------------------------------------------------------------------------
// Evaluation

template <class Real>
struct DensityJet {
  Real value;
  std::vector<Real> gradient;
};

namespace detail {

inline void check_dim(std::size_t got, int want) {
  if (got != static_cast<std::size_t>(want))
    throw std::invalid_argument("mixture evaluation: point dimension does not match mixture");
}

/// Components whose exponent exceeds the smallest one by more than
/// (bits + 64) ln 2 cannot change the rounded sum and are skipped.
template <class Real>
std::vector<char> live_components(const Mixture<Real>& m, std::span<const Real> x, int bits) {
  const int d = m.dim();
  const auto& cd = m.centers_double();
  std::vector<double> xd(d);
  for (int j = 0; j < d; ++j) xd[j] = to_double(x[j]);
  std::vector<double> half_r2(m.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m.size(); ++k) {
    double r2 = 0;
    for (int j = 0; j < d; ++j) {
      const double t = xd[j] - cd[k * d + j];
      r2 += t * t;
    }
    half_r2[k] = 0.5 * r2 - std::log(to_double(m.weight(k)));
    best = std::min(best, half_r2[k]);
  }
  const double cut = best + (bits + kGuardBits) * 0.6931471805599453 + 4.0;
  std::vector<char> live(m.size());
  for (std::size_t k = 0; k < m.size(); ++k) live[k] = half_r2[k] <= cut;
  return live;
}

template <class Real>
DensityJet<Real> evaluate(const Mixture<Real>& m, std::span<const Real> x, const PrecisionContext& ctx,
                          bool with_gradient) {
  using std::exp;
  check_dim(x.size(), m.dim());
  const int d = m.dim();
  const auto live = live_components(m, x, ctx.mantissa_bits);
  CompensatedAccumulator<Real> value;
  std::vector<CompensatedAccumulator<Real>> grad(with_gradient ? d : 0);
  std::vector<Real> diff(d);
  const Real minus_half(-0.5);
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (!live[k]) continue;
    const auto c = m.center(k);
    Real r2(0);
    for (int j = 0; j < d; ++j) {
      diff[j] = c[j] - x[j];
      r2 += diff[j] * diff[j];
    }
    Real term = m.weight(k) * exp(minus_half * r2);
    value.add(term);
    if (with_gradient)
      for (int j = 0; j < d; ++j) grad[j].add(diff[j] * term);
  }
  DensityJet<Real> out{value.value() * m.normalizer(), {}};
  if (with_gradient) {
    out.gradient.reserve(d);
    for (int j = 0; j < d; ++j) out.gradient.push_back(grad[j].value() * m.normalizer());
  }
  return out;
}

}  // namespace detail

/// sum_k w_k (2 pi)^{-d/2} exp(-|x - a_k|^2 / 2)
template <class Real>
Real density(const Mixture<Real>& m, std::span<const Real> x, const PrecisionContext& ctx) {
  PrecisionScope<Real> scope(ctx);
  return detail::evaluate(m, x, ctx, false).value;
}

template <class Real>
Real density(const Mixture<Real>& m, const Real& x, const PrecisionContext& ctx) {
  return density(m, std::span<const Real>(&x, 1), ctx);
}

/// sum_k w_k (a_k - x) phi_d(x - a_k)
template <class Real>
std::vector<Real> density_gradient(const Mixture<Real>& m, std::span<const Real> x, const PrecisionContext& ctx) {
  PrecisionScope<Real> scope(ctx);
  return detail::evaluate(m, x, ctx, true).gradient;
}

/// Scalar derivative of a one-dimensional mixture.
template <class Real>
Real density_derivative(const Mixture<Real>& m, const Real& x, const PrecisionContext& ctx) {
  PrecisionScope<Real> scope(ctx);
  return std::move(detail::evaluate(m, std::span<const Real>(&x, 1), ctx, true).gradient[0]);
}

/// Density and gradient from a single pass over the components.
template <class Real>
DensityJet<Real> density_jet(const Mixture<Real>& m, std::span<const Real> x, const PrecisionContext& ctx) {
  PrecisionScope<Real> scope(ctx);
  return detail::evaluate(m, x, ctx, true);
}

/// Variance of the mixing distribution sum_k w_k delta_{a_k}, summed over
/// coordinates: sum w |a|^2 - |sum w a|^2.
template <class Real>
Real mixing_variance(const Mixture<Real>& m) {
  if (!m.normalized()) throw std::invalid_argument("mixing_variance: mixture must be normalized");
  const int d = m.dim();
  CompensatedAccumulator<Real> second;
  std::vector<CompensatedAccumulator<Real>> first(d);
  for (std::size_t k = 0; k < m.size(); ++k) {
    const auto c = m.center(k);
    for (int j = 0; j < d; ++j) {
      Real wc = m.weight(k) * c[j];
      second.add(wc * c[j]);
      first[j].add(wc);
    }
  }
  Real var = second.value();
  for (int j = 0; j < d; ++j) {
    Real mu = first[j].value();
    var -= mu * mu;
  }
  if (var < Real(0)) var = Real(0);
  return var;
}

}  // namespace gmodes
