#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pettis/paths.hpp"
#include "pettis/stats.hpp"
#include "pettis/vecspace.hpp"

namespace pettis {

inline constexpr double kPartitionExactTol = 1e-12;

// Finite sub-sigma-algebra: a cell id per ensemble path. Cells must be
// nonempty and exhaustive.
class Partition {
 public:
  Partition(std::vector<int> cell_of, int num_cells);

  static Partition trivial(int count);
  static Partition singletons(int count);
  // Contiguous rank bins of `values`: num_cells groups of (near-)equal size,
  // nested across dyadic refinement when counts divide evenly.
  static Partition rank_bins(std::span<const double> values, int num_cells);

  int count() const { return static_cast<int>(cell_of_.size()); }
  int num_cells() const { return num_cells_; }
  int cell(int k) const { return cell_of_[static_cast<std::size_t>(k)]; }
  const std::vector<std::vector<int>>& members() const { return members_; }

 private:
  std::vector<int> cell_of_;
  int num_cells_ = 0;
  std::vector<std::vector<int>> members_;
};

// Conditional expectation given the partition: each output is its cell's
// arithmetic mean, so cellwise sums of input and output agree exactly.
std::vector<Vector> cond_exp_partition(std::span<const Vector> samples, const Partition& part);

// (E(phi X | F), phi E(X | F)) for a cell-constant phi; the two coincide.
std::pair<std::vector<Vector>, std::vector<Vector>> pullout(std::span<const Vector> samples,
                                                            std::span<const double> phi,
                                                            const Partition& part);

// Parameters of a jointly Gaussian pair (z_t, z_u) with correlation rho.
struct GaussianPair {
  double mu_t = 0.0;
  double sigma_t = 1.0;
  double mu_u = 0.0;
  double sigma_u = 1.0;
  double rho = 0.0;

  GaussianPair(double mu_t, double sigma_t, double mu_u, double sigma_u, double rho);
  // Brownian values (w_t, w_u) for t <= u: zero means, sqrt variances,
  // rho = sqrt(t/u).
  static GaussianPair brownian(double t, double u);
};

// E(z_t | z_u) = mu_t + rho (sigma_t / sigma_u)(z_u - mu_u).
double gaussian_cond_exp(const GaussianPair& p, double z_u);

// Conditioning time 0 < t < T for the pinned-endpoint density.
struct BridgeKernel {
  double t = 0.0;
  double T = 0.0;
  BridgeKernel(double t, double T);
};

// Density of w_t given w_T; equals the Normal((t/T) w_T, t(T-t)/T) density.
double bridge_density(const BridgeKernel& k, double x, double w_T);

// Statistic with a closed-form conditional expectation given the terminal
// value: w_t, w_t^2, or w_s * w_t.
struct ConditionalStatistic {
  enum class Kind { ValueAt, SquareAt, ProductAt };

  Kind kind = Kind::ValueAt;
  double s = 0.0;  // only for ProductAt
  double t = 0.0;

  static ConditionalStatistic value_at(double t);
  static ConditionalStatistic square_at(double t);
  static ConditionalStatistic product_at(double s, double t);
  // "w_t" | "w_t^2" | "w_s*w_t"; anything else is UnsupportedStatisticError.
  static ConditionalStatistic parse(const std::string& name, double s, double t);

  // E(statistic | w_T = terminal), horizon T.
  double conditional_mean_given_terminal(double terminal, double horizon) const;
};

using PathPredicate = std::function<bool(std::span<const double>, const TimeGrid&)>;

// (1/count) sum over paths in A of E(statistic | w_T), the action of the
// conditional vector measure on the statistic.
double n_measure_integral(const ConditionalStatistic& stat, const PathPredicate& event,
                          const PathEnsemble& ensemble);

struct ConditionalRegressionReport {
  RegressionReport reg;
  double target_slope = 0.0;  // oracle-predicted slope
  bool verdict = false;       // op-specific claim holds at the 3 SE gate
  bool martingale = false;    // slope within 3 SE of 1
  bool inconclusive = false;
  double s = 0.0;
  double t = 0.0;
  double alpha = 0.0;  // 0 when not applicable
};

// Regresses the closed-form inner conditional (t/T) w_T on w_s. The verdict
// confirms slope = t/T and intercept = 0, i.e. the process is a martingale
// for the conditional measure only at t = T.
ConditionalRegressionReport n_martingale_check(double s, double t, const PathEnsemble& ensemble);

// Same regression with the conditioning level scaled by alpha: the inner
// conditional becomes (t/T) alpha w_T, so the martingale verdict (slope 1)
// holds exactly when alpha = T/t.
ConditionalRegressionReport q_kernel_cond(double alpha, double s, double t,
                                          const PathEnsemble& ensemble);

struct BridgeRegressionReport {
  RegressionReport reg;
  TestReport slope_test;     // slope of w_t on w_T vs t/T
  TestReport cond_var_test;  // residual variance vs t(T-t)/T
  double t = 0.0;
};

// Empirical check of the pinned-endpoint law across the ensemble.
BridgeRegressionReport bridge_regression(const PathEnsemble& ensemble, double t,
                                         double z_gate = kDefaultZGate);

}  // namespace pettis
