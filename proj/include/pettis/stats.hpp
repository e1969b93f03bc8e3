#pragma once

#include <span>
#include <string>
#include <vector>

#include "pettis/errors.hpp"

namespace pettis {

inline constexpr double kDefaultZGate = 3.0;

// Deterministic reduction with a fixed pairwise topology: the result depends
// only on the input ordering, never on chunking or worker count.
double pairwise_sum(std::span<const double> xs);

// Values with nonnegative weights; empty weights mean uniform.
struct WeightedSample {
  std::vector<double> values;
  std::vector<double> weights;

  WeightedSample() = default;
  explicit WeightedSample(std::vector<double> v);
  WeightedSample(std::vector<double> v, std::vector<double> w);

  static WeightedSample uniform(std::vector<double> v) { return WeightedSample(std::move(v)); }

  int count() const { return static_cast<int>(values.size()); }
  bool is_uniform() const { return weights.empty(); }
  double weight(int k) const { return weights.empty() ? 1.0 : weights[static_cast<std::size_t>(k)]; }
};

struct MeanResult {
  double mean;
  double se;
};

// Self-normalized mean with the ratio-estimator (delta method) standard error.
MeanResult wmean(const WeightedSample& s);

// Delete-one jackknife standard error for the self-normalized mean.
double wmean_se_jackknife(const WeightedSample& s);

struct TestReport {
  std::string name;
  double estimate = 0.0;
  double target = 0.0;
  double se = 0.0;
  double z = 0.0;
  double z_gate = kDefaultZGate;
  bool pass = false;
  bool inconclusive = false;
};

TestReport z_test(std::string name, double estimate, double target, double se,
                  double z_gate = kDefaultZGate);

// Weighted moment tests with delta-method standard errors computed from the
// per-observation influence values. With uniform weights these reduce to the
// classical SEs (e.g. sqrt(6/n) for skewness under normality).
TestReport weighted_mean_test(const WeightedSample& s, double target, std::string name,
                              double z_gate = kDefaultZGate);
TestReport weighted_variance_test(const WeightedSample& s, double target, std::string name,
                                  double z_gate = kDefaultZGate);
TestReport weighted_skewness_test(const WeightedSample& s, std::string name,
                                  double z_gate = kDefaultZGate);
TestReport weighted_excess_kurtosis_test(const WeightedSample& s, std::string name,
                                         double z_gate = kDefaultZGate);
TestReport weighted_covariance_test(std::span<const double> x, std::span<const double> y,
                                    std::span<const double> weights, double target,
                                    std::string name, double z_gate = kDefaultZGate);

// One Brownian increment sample over (s, t], carrying its own weights.
struct IncrementSample {
  double s = 0.0;
  double t = 0.0;
  WeightedSample sample;
};

// Moment checks of the Brownian increment law: mean 0, variance t - s,
// skewness 0, excess kurtosis 0, plus zero covariance for every pair of
// non-overlapping increments.
std::vector<TestReport> brownian_law_check(const std::vector<IncrementSample>& increments,
                                           double z_gate = kDefaultZGate);

// A test statistic measurable from the path prefix up to s.
struct FsStatistic {
  std::string tag;
  std::vector<double> values;
};

// For each g: z-test of E[(v_t - v_s) * g] against 0.
std::vector<TestReport> martingale_z(const WeightedSample& v_s, const WeightedSample& v_t,
                                     const std::vector<FsStatistic>& gs,
                                     double z_gate = kDefaultZGate,
                                     const std::string& name_prefix = "");

struct RegressionReport {
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
  double intercept_se = 0.0;
  long n = 0;
  bool inconclusive = false;  // regressor variance numerically zero
};

RegressionReport linear_regression(std::span<const double> x, std::span<const double> y);

struct SuiteSummary {
  int total = 0;
  int failed = 0;
  bool pass = false;
};

SuiteSummary summarize(const std::vector<TestReport>& reports);

}  // namespace pettis
