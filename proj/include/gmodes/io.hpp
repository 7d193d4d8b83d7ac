#pragma once

// JSON interchange for mixtures and mode reports.

#include <gmodes/mixture.hpp>
#include <gmodes/modes.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace gmodes {

/// {dim, centers: [[...], ...], weights: [...], normalized}. Values are
/// written as doubles; extended mixtures lose precision beyond 53 bits.
template <class Real>
nlohmann::json mixture_to_json(const Mixture<Real>& m) {
  nlohmann::json centers = nlohmann::json::array();
  nlohmann::json weights = nlohmann::json::array();
  for (std::size_t k = 0; k < m.size(); ++k) {
    nlohmann::json c = nlohmann::json::array();
    for (const auto& v : m.center(k)) c.push_back(to_double(v));
    centers.push_back(std::move(c));
    weights.push_back(to_double(m.weight(k)));
  }
  return {{"dim", m.dim()}, {"centers", centers}, {"weights", weights}, {"normalized", m.normalized()}};
}

template <class Real>
Mixture<Real> mixture_from_json(const nlohmann::json& j) {
  const int dim = j.at("dim").get<int>();
  std::vector<Real> centers;
  std::vector<Real> weights;
  for (const auto& c : j.at("centers")) {
    if (!c.is_array() || static_cast<int>(c.size()) != dim)
      throw std::invalid_argument("mixture json: every center must have dim coordinates");
    for (const auto& v : c) centers.push_back(Real(v.get<double>()));
  }
  for (const auto& w : j.at("weights")) weights.push_back(Real(w.get<double>()));
  return Mixture<Real>(dim, std::move(centers), std::move(weights), j.value("normalized", false));
}

inline nlohmann::json to_json(const ModeReport& r) {
  return {{"count", r.count},
          {"locations", r.locations},
          {"certified", r.certified},
          {"method", to_string(r.method)},
          {"precision_bits", r.precision_bits},
          {"region", {{"lo", r.search_region.lo}, {"hi", r.search_region.hi}}}};
}

inline ModeReport mode_report_from_json(const nlohmann::json& j) {
  ModeReport r;
  r.count = j.at("count").get<std::size_t>();
  r.locations = j.at("locations").get<std::vector<std::vector<double>>>();
  r.certified = j.at("certified").get<bool>();
  r.method = mode_method_from_string(j.at("method").get<std::string>());
  r.precision_bits = j.at("precision_bits").get<int>();
  r.search_region.lo = j.at("region").at("lo").get<std::vector<double>>();
  r.search_region.hi = j.at("region").at("hi").get<std::vector<double>>();
  return r;
}

}  // namespace gmodes
