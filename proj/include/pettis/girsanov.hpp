#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pettis/integrate.hpp"
#include "pettis/stats.hpp"

namespace pettis {

// Algebraic gate for the grid-level drift cancellation; no statistics involved.
inline constexpr double kDriftResidualGate = 1e-10;
// Weights are flagged degenerate below this effective-sample-size fraction.
inline constexpr double kEssDegenerateFraction = 0.01;
// Grid surrogate for the Novikov condition: cap on sum r(t_i)^2 dt, past which
// the exponential weights leave double range.
inline constexpr double kNovikovSurrogateMax = 500.0;
inline constexpr double kDefaultProportionalityTol = 1e-8;

// Per-path log Radon-Nikodym weights log y_T with degeneracy diagnostics.
struct MeasureWeights {
  std::vector<double> log_weights;
  double log_norm = 0.0;  // log-sum-exp of log_weights
  double ess = 0.0;       // (sum u)^2 / sum u^2 with u = exp(lw - max)
  bool degenerate = false;

  int count() const { return static_cast<int>(log_weights.size()); }
  double ess_fraction() const { return ess / static_cast<double>(count()); }
  // u_k = exp(log_weights_k - max); proportional to the true weights, which is
  // all self-normalized estimators need.
  std::vector<double> linear() const;

  static MeasureWeights from_log(std::vector<double> lws);
  static MeasureWeights uniform(int count);
};

// log y(t_k) = -1/2 sum_{i<k} theta(t_i)^2 dt - sum_{i<k} theta(t_i) dw_i.
ScalarPath log_exp_martingale(const ScalarField& theta, const ScalarPath& w);

// y itself; throws NumericError (quoting the log value) if exponentiation
// overflows.
ScalarPath exp_martingale(const ScalarField& theta, const ScalarPath& w);

// Terminal weights log y_T for every path of the ensemble.
MeasureWeights weights_from(const ScalarField& theta, const PathEnsemble& ensemble);

// w~(t_k) = w(t_k) + int_0^{t_k} r ds (left sums), so the increment identity
// dw~_i = dw_i + r(t_i) dt is the defining relation used downstream.
ScalarPath shift_brownian(const ScalarPath& w, const ScalarField& r);

// The scalar link r with Psi(t) = r(t) Phi(t) at every grid node:
// r(t) = <Psi,Phi>/<Phi,Phi>, rejected unless the proportionality residual
// ||Psi - r Phi|| <= prop_tol * ||Psi|| holds nodewise.
ScalarField drift_cancel_r(const VectorField& psi, const VectorField& phi, const TimeGrid& grid,
                           double prop_tol = kDefaultProportionalityTol);

struct GirsanovSetup {
  TimeGrid grid;
  VectorField psi;
  VectorField phi;
  ScalarField r;

  // Validates nodewise proportionality Psi = r Phi and the Novikov surrogate.
  static GirsanovSetup make(const TimeGrid& grid, VectorField psi, VectorField phi,
                            ScalarField r, double prop_tol = kDefaultProportionalityTol);
  static GirsanovSetup make_auto(const TimeGrid& grid, VectorField psi, VectorField phi,
                                 double prop_tol = kDefaultProportionalityTol);
};

struct ZScoreEntry {
  std::string kind;    // "martingale" | "increment" | "weight"
  int functional = -1; // index into the family, -1 when not applicable
  double s = 0.0;
  double t = 0.0;
  std::string stat;
  TestReport test;
};

struct CertifyOptions {
  // Node pairs s < t for the martingale z-tests; defaults to
  // {(T/4,T/2), (T/2,3T/4), (T/4,T)}.
  std::vector<std::pair<double, double>> martingale_pairs;
  // Cut points for the shifted-increment law tests; defaults to quarters.
  std::vector<double> increment_cuts;
  double z_gate = kDefaultZGate;
  // Score under P (weights identically 1) instead of Q; the negative control.
  bool uniform_weights = false;
};

struct GirsanovReport {
  double weight_mean = 0.0;     // unnormalized mean of y_T, target 1
  double weight_mean_se = 0.0;
  double ess = 0.0;
  double ess_fraction = 0.0;
  bool weights_degenerate = false;
  bool log_weights_finite = true;
  // max over paths and nodes of || A(t) - sum_{i<t} Phi(t_i) dw~_i ||
  double drift_residual = 0.0;
  // max reconstruction residual of the weak integrals
  double weak_residual = 0.0;
  std::vector<ZScoreEntry> z_scores;
  bool inconclusive = false;
  bool pass = false;
};

// Statistical certificate for drift removal by a change of measure: (a) grid-exact drift
// cancellation, (b) martingale z-tests of the paired process under the
// reweighted measure, (c) moment checks of the shifted increments.
GirsanovReport girsanov_certify(const GirsanovSetup& setup, const PathEnsemble& ensemble,
                                const DualFamily& family, const NormedSpace& space,
                                const CertifyOptions& options = {});

}  // namespace pettis
