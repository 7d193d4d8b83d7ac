#pragma once

// Shared fixtures: random mixtures and a naive long-double density.

#include <gmodes/mixture.hpp>

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace testing_support {

/// Normalized 1-D mixture with 1..max_components components, centers in
/// [-10, 10] and weights drawn uniformly before normalization.
inline gmodes::Mixture<double> random_mixture_1d(std::mt19937_64& rng, int max_components = 7) {
  std::uniform_int_distribution<int> count(1, max_components);
  std::uniform_real_distribution<double> center(-10, 10);
  std::uniform_real_distribution<double> weight(0.05, 1);
  const int k = count(rng);
  std::vector<double> c, w;
  double total = 0;
  for (int i = 0; i < k; ++i) {
    c.push_back(center(rng));
    w.push_back(weight(rng));
    total += w.back();
  }
  for (auto& v : w) v /= total;
  double s = 0;
  for (double v : w) s += v;
  w.back() += 1.0 - s;
  return gmodes::Mixture<double>(1, c, w, true);
}

/// Unnormalized d-dimensional mixture with centers in [-3, 3]^d.
inline gmodes::Mixture<double> random_mixture_d(std::mt19937_64& rng, int d, int components) {
  std::uniform_real_distribution<double> center(-3, 3);
  std::uniform_real_distribution<double> weight(0.1, 2);
  std::vector<double> c, w;
  for (int i = 0; i < components; ++i) {
    for (int j = 0; j < d; ++j) c.push_back(center(rng));
    w.push_back(weight(rng));
  }
  return gmodes::Mixture<double>(d, c, w, false);
}

/// Direct evaluation in long double, no screening or compensation.
inline long double naive_density(const gmodes::Mixture<double>& m, const std::vector<double>& x) {
  const int d = m.dim();
  long double s = 0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    long double r2 = 0;
    for (int j = 0; j < d; ++j) {
      const long double t = static_cast<long double>(x[j]) - m.centers()[k * d + j];
      r2 += t * t;
    }
    s += m.weight(k) * std::exp(-0.5L * r2);
  }
  return s / std::pow(2 * 3.14159265358979323846264338327950288L, d / 2.0L);
}

/// (x, y) pairs of the density polyline in an SVG; empty if absent.
inline std::vector<std::pair<double, double>> polyline_points(const std::string& svg) {
  std::vector<std::pair<double, double>> pts;
  const auto tag = svg.find("<polyline id=\"density\"");
  if (tag == std::string::npos) return pts;
  const std::string key = "points=\"";
  const auto start = svg.find(key, tag);
  if (start == std::string::npos) return pts;
  const auto end = svg.find('"', start + key.size());
  std::stringstream ss(svg.substr(start + key.size(), end - start - key.size()));
  for (std::string tok; ss >> tok;) {
    const auto comma = tok.find(',');
    pts.emplace_back(std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1)));
  }
  return pts;
}

}  // namespace testing_support
