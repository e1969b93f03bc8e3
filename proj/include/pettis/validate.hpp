#pragma once

#include <string>
#include <vector>

namespace pettis {

struct GateResult {
  std::string name;
  double residual = 0.0;
  double gate = 0.0;
  bool pass = false;
};

// Deterministic exact-algebra gates: no Monte Carlo, fixed synthetic inputs.
// Covers weak-integral round trips, the scalar-against-vector-measure
// identity, partition conditional expectations, and the bridge density.
std::vector<GateResult> run_exact_algebra_suite();

}  // namespace pettis
