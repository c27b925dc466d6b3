#pragma once

#include <nlohmann/json.hpp>

#include "pcme/conjugacy.hpp"
#include "pcme/gaussian.hpp"
#include "pcme/stability.hpp"

// Single include point for report serialization so the core headers stay
// free of the vendored JSON dependency.

namespace pcme {

using json = nlohmann::json;

inline json to_json(const StabilityReport& r) {
  json per_point = json::array();
  for (const StabilityPoint& p : r.per_point)
    per_point.push_back({{"t", p.t}, {"lhs", p.lhs}});
  return json{{"model", "poisson"},
              {"epsilon_hat", r.epsilon_hat},
              {"std_err", r.std_err},
              {"lhs_sup_on_grid", r.lhs_sup_on_grid},
              {"rhs_bound", r.rhs_bound},
              {"holds", r.holds},
              {"ill_conditioned", r.ill_conditioned},
              {"grid_semantics", r.grid_semantics},
              {"per_point", per_point}};
}

inline json to_json(const GaussianStabilityReport& r) {
  json input_points = json::array();
  for (const GaussianBoundPoint& p : r.input_points)
    input_points.push_back({{"t", p.t}, {"lhs", p.lhs}, {"rhs", p.rhs}});
  json output_points = json::array();
  for (const GaussianBoundPoint& p : r.output_points)
    output_points.push_back({{"t", p.t}, {"lhs", p.lhs}});
  return json{{"model", "gaussian"},
              {"epsilon_hat", r.epsilon_hat},
              {"std_err", r.std_err},
              {"a_operator_norm", r.a_operator_norm},
              {"sigma_min_i_ah", r.sigma_min_i_ah},
              {"holds", r.holds},
              {"ill_conditioned", r.ill_conditioned},
              {"grid_semantics", r.grid_semantics},
              {"input_bound",
               {{"kind", "pointwise"},
                {"holds", r.input_holds},
                {"per_point", input_points}}},
              {"output_bound",
               {{"kind", "uniform"},
                {"holds", r.output_holds},
                {"rhs_bound", r.output_rhs},
                {"per_point", output_points}}}};
}

inline json to_json(const RealizabilityReport& r) {
  json j{{"realizable", r.realizable},
         {"dark_current_zero", r.dark_current_zero},
         {"ac_diagonal", r.ac_diagonal},
         {"ac_gains_in_range", r.ac_gains_in_range},
         {"ab_positive", r.ab_positive},
         {"failures", r.failures}};
  if (r.induced_prior) {
    Vec shape, rate;
    for (const GammaParams& p : r.induced_prior->coords) {
      shape.push_back(p.shape);
      rate.push_back(p.rate);
    }
    j["induced_prior"] = {{"shape", shape}, {"rate", rate}};
  }
  return j;
}

}  // namespace pcme
