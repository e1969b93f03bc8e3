#pragma once

#include <json.hpp>

#include "pettis/conditioning.hpp"
#include "pettis/girsanov.hpp"
#include "pettis/stats.hpp"
#include "pettis/validate.hpp"

namespace pettis {

using OrderedJson = nlohmann::ordered_json;

inline OrderedJson to_json(const TestReport& r) {
  OrderedJson j;
  j["name"] = r.name;
  j["estimate"] = r.estimate;
  j["target"] = r.target;
  j["se"] = r.se;
  j["z"] = r.z;
  j["gate"] = r.z_gate;
  j["pass"] = r.pass;
  if (r.inconclusive) j["inconclusive"] = true;
  return j;
}

inline OrderedJson to_json(const ZScoreEntry& e) {
  OrderedJson j;
  j["kind"] = e.kind;
  j["functional"] = e.functional;
  j["s"] = e.s;
  j["t"] = e.t;
  j["stat"] = e.stat;
  j["estimate"] = e.test.estimate;
  j["target"] = e.test.target;
  j["se"] = e.test.se;
  j["z"] = e.test.z;
  j["pass"] = e.test.pass;
  return j;
}

inline OrderedJson to_json(const GirsanovReport& r) {
  OrderedJson j;
  j["weight_mean"] = r.weight_mean;
  j["weight_mean_se"] = r.weight_mean_se;
  j["ess"] = r.ess;
  j["ess_fraction"] = r.ess_fraction;
  j["weights_degenerate"] = r.weights_degenerate;
  j["log_weights_finite"] = r.log_weights_finite;
  j["drift_residual"] = r.drift_residual;
  j["weak_residual"] = r.weak_residual;
  j["z_scores"] = OrderedJson::array();
  for (const auto& e : r.z_scores) j["z_scores"].push_back(to_json(e));
  j["inconclusive"] = r.inconclusive;
  j["pass"] = r.pass;
  return j;
}

inline OrderedJson to_json(const ConditionalRegressionReport& r) {
  OrderedJson j;
  j["s"] = r.s;
  j["t"] = r.t;
  if (r.alpha != 0.0) j["alpha"] = r.alpha;
  j["slope"] = r.reg.slope;
  j["slope_se"] = r.reg.slope_se;
  j["intercept"] = r.reg.intercept;
  j["intercept_se"] = r.reg.intercept_se;
  j["target_slope"] = r.target_slope;
  j["martingale"] = r.martingale;
  j["verdict"] = r.verdict ? "PASS" : "FAIL";
  if (r.inconclusive) j["inconclusive"] = true;
  return j;
}

inline OrderedJson to_json(const BridgeRegressionReport& r) {
  OrderedJson j;
  j["t"] = r.t;
  j["slope"] = r.reg.slope;
  j["slope_se"] = r.reg.slope_se;
  j["intercept"] = r.reg.intercept;
  j["intercept_se"] = r.reg.intercept_se;
  j["slope_test"] = to_json(r.slope_test);
  j["cond_var_test"] = to_json(r.cond_var_test);
  j["verdict"] = (r.slope_test.pass && r.cond_var_test.pass) ? "PASS" : "FAIL";
  return j;
}

inline OrderedJson to_json(const GateResult& g) {
  OrderedJson j;
  j["name"] = g.name;
  j["residual"] = g.residual;
  j["gate"] = g.gate;
  j["pass"] = g.pass;
  return j;
}

}  // namespace pettis
