#include "pettis/stats.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

namespace pettis {

double pairwise_sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

WeightedSample::WeightedSample(std::vector<double> v) : values(std::move(v)) {
  if (values.empty()) throw UsageError("weighted sample must be nonempty");
}

WeightedSample::WeightedSample(std::vector<double> v, std::vector<double> w)
    : values(std::move(v)), weights(std::move(w)) {
  if (values.empty()) throw UsageError("weighted sample must be nonempty");
  if (!weights.empty() && weights.size() != values.size()) {
    throw UsageError("weights length does not match values length");
  }
  for (double x : weights) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw UsageError("weights must be finite and nonnegative");
    }
  }
}

namespace {

// Weights as a sum ratio: estimators divide by the total exactly once, so a
// constant sample stays exact instead of wobbling by per-element rounding.
struct Weighting {
  std::vector<double> w;
  double total = 0.0;
};

Weighting weighting_of(const WeightedSample& s) {
  Weighting out;
  if (s.is_uniform()) {
    out.w.assign(s.values.size(), 1.0);
    out.total = static_cast<double>(s.values.size());
    return out;
  }
  out.w = s.weights;
  out.total = pairwise_sum(out.w);
  if (!(out.total > 0.0)) throw UsageError("total weight must be positive");
  return out;
}

double weighted_mean(const Weighting& wt, std::span<const double> v) {
  std::vector<double> prod(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) prod[k] = wt.w[k] * v[k];
  return pairwise_sum(prod) / wt.total;
}

// Weighted central moment sum(w (v - m)^r) / sum(w), two-pass.
double central_moment(const Weighting& wt, std::span<const double> v, double m, int r) {
  std::vector<double> term(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double c = v[k] - m;
    double cr = c;
    for (int e = 1; e < r; ++e) cr *= c;
    term[k] = wt.w[k] * cr;
  }
  return pairwise_sum(term) / wt.total;
}

// Standard error of a plug-in estimator from its influence values:
// se^2 = sum(w_k^2 phi_k^2) / (sum w)^2.
double influence_se(const Weighting& wt, std::span<const double> phi) {
  std::vector<double> term(phi.size());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const double x = wt.w[k] * phi[k];
    term[k] = x * x;
  }
  return std::sqrt(pairwise_sum(term)) / wt.total;
}

}  // namespace

MeanResult wmean(const WeightedSample& s) {
  const Weighting wt = weighting_of(s);
  const double m = weighted_mean(wt, s.values);
  std::vector<double> phi(s.values.size());
  for (std::size_t k = 0; k < phi.size(); ++k) phi[k] = s.values[k] - m;
  return MeanResult{m, influence_se(wt, phi)};
}

double wmean_se_jackknife(const WeightedSample& s) {
  const std::size_t n = s.values.size();
  if (n < 2) return 0.0;
  std::vector<double> w(n, 1.0);
  if (!s.is_uniform()) w = s.weights;
  std::vector<double> wv(n);
  for (std::size_t k = 0; k < n; ++k) wv[k] = w[k] * s.values[k];
  const double sw = pairwise_sum(w);
  const double swv = pairwise_sum(wv);
  if (!(sw > 0.0)) throw UsageError("total weight must be positive");

  std::vector<double> loo(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double denom = sw - w[k];
    // A path carrying all the weight leaves an undefined leave-one-out mean;
    // fall back to the full-sample mean for that replicate.
    loo[k] = denom > 0.0 ? (swv - wv[k]) / denom : swv / sw;
  }
  const double loo_mean = pairwise_sum(loo) / static_cast<double>(n);
  std::vector<double> dev(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double d = loo[k] - loo_mean;
    dev[k] = d * d;
  }
  const double nf = static_cast<double>(n);
  return std::sqrt((nf - 1.0) / nf * pairwise_sum(dev));
}

TestReport z_test(std::string name, double estimate, double target, double se, double z_gate) {
  TestReport r;
  r.name = std::move(name);
  r.estimate = estimate;
  r.target = target;
  r.se = se;
  r.z_gate = z_gate;
  if (!std::isfinite(estimate) || !std::isfinite(se)) {
    r.inconclusive = true;
    r.z = std::numeric_limits<double>::quiet_NaN();
    r.pass = false;
    return r;
  }
  if (se > 0.0) {
    r.z = (estimate - target) / se;
    r.pass = std::abs(r.z) <= z_gate;
  } else {
    // Degenerate sample: exact agreement or hard failure.
    r.z = estimate == target ? 0.0 : std::numeric_limits<double>::infinity();
    r.pass = estimate == target;
  }
  return r;
}

TestReport weighted_mean_test(const WeightedSample& s, double target, std::string name,
                              double z_gate) {
  const auto [m, se] = wmean(s);
  return z_test(std::move(name), m, target, se, z_gate);
}

TestReport weighted_variance_test(const WeightedSample& s, double target, std::string name,
                                  double z_gate) {
  const Weighting wt = weighting_of(s);
  const double m = weighted_mean(wt, s.values);
  const double mu2 = central_moment(wt, s.values, m, 2);
  std::vector<double> phi(s.values.size());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const double c = s.values[k] - m;
    phi[k] = c * c - mu2;
  }
  return z_test(std::move(name), mu2, target, influence_se(wt, phi), z_gate);
}

TestReport weighted_skewness_test(const WeightedSample& s, std::string name, double z_gate) {
  const Weighting wt = weighting_of(s);
  const double m = weighted_mean(wt, s.values);
  const double mu2 = central_moment(wt, s.values, m, 2);
  if (!(mu2 > 0.0)) {
    TestReport r = z_test(std::move(name), 0.0, 0.0, 0.0, z_gate);
    r.inconclusive = true;
    r.pass = false;
    return r;
  }
  const double mu3 = central_moment(wt, s.values, m, 3);
  const double skew = mu3 / std::pow(mu2, 1.5);
  std::vector<double> phi(s.values.size());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const double c = s.values[k] - m;
    const double d_mu3 = c * c * c - mu3 - 3.0 * mu2 * c;
    const double d_mu2 = c * c - mu2;
    phi[k] = d_mu3 / std::pow(mu2, 1.5) - 1.5 * mu3 / std::pow(mu2, 2.5) * d_mu2;
  }
  return z_test(std::move(name), skew, 0.0, influence_se(wt, phi), z_gate);
}

TestReport weighted_excess_kurtosis_test(const WeightedSample& s, std::string name,
                                         double z_gate) {
  const Weighting wt = weighting_of(s);
  const double m = weighted_mean(wt, s.values);
  const double mu2 = central_moment(wt, s.values, m, 2);
  if (!(mu2 > 0.0)) {
    TestReport r = z_test(std::move(name), 0.0, 0.0, 0.0, z_gate);
    r.inconclusive = true;
    r.pass = false;
    return r;
  }
  const double mu3 = central_moment(wt, s.values, m, 3);
  const double mu4 = central_moment(wt, s.values, m, 4);
  const double exkurt = mu4 / (mu2 * mu2) - 3.0;
  std::vector<double> phi(s.values.size());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    const double c = s.values[k] - m;
    const double d_mu4 = c * c * c * c - mu4 - 4.0 * mu3 * c;
    const double d_mu2 = c * c - mu2;
    phi[k] = d_mu4 / (mu2 * mu2) - 2.0 * mu4 / (mu2 * mu2 * mu2) * d_mu2;
  }
  return z_test(std::move(name), exkurt, 0.0, influence_se(wt, phi), z_gate);
}

TestReport weighted_covariance_test(std::span<const double> x, std::span<const double> y,
                                    std::span<const double> weights, double target,
                                    std::string name, double z_gate) {
  if (x.size() != y.size()) throw UsageError("covariance inputs must have equal length");
  if (x.empty()) throw UsageError("covariance inputs must be nonempty");
  if (!weights.empty() && weights.size() != x.size()) {
    throw UsageError("weights length does not match values length");
  }
  const WeightedSample xs(std::vector<double>(x.begin(), x.end()),
                          std::vector<double>(weights.begin(), weights.end()));
  const Weighting wt = weighting_of(xs);
  const double mx = weighted_mean(wt, x);
  const double my = weighted_mean(wt, y);
  std::vector<double> term(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) term[k] = wt.w[k] * (x[k] - mx) * (y[k] - my);
  const double cov = pairwise_sum(term) / wt.total;
  std::vector<double> phi(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) phi[k] = (x[k] - mx) * (y[k] - my) - cov;
  return z_test(std::move(name), cov, target, influence_se(wt, phi), z_gate);
}

namespace {
std::string span_label(double s, double t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "(%g,%g]", s, t);
  return std::string(buf);
}
}  // namespace

std::vector<TestReport> brownian_law_check(const std::vector<IncrementSample>& increments,
                                           double z_gate) {
  std::vector<TestReport> out;
  for (const auto& inc : increments) {
    if (!(inc.t > inc.s)) throw UsageError("increment must have t > s");
    const std::string label = span_label(inc.s, inc.t);
    out.push_back(weighted_mean_test(inc.sample, 0.0, "inc" + label + ".mean", z_gate));
    out.push_back(weighted_variance_test(inc.sample, inc.t - inc.s, "inc" + label + ".var", z_gate));
    out.push_back(weighted_skewness_test(inc.sample, "inc" + label + ".skew", z_gate));
    out.push_back(weighted_excess_kurtosis_test(inc.sample, "inc" + label + ".exkurt", z_gate));
  }
  for (std::size_t i = 0; i < increments.size(); ++i) {
    for (std::size_t j = i + 1; j < increments.size(); ++j) {
      const auto& a = increments[i];
      const auto& b = increments[j];
      const bool disjoint = a.t <= b.s || b.t <= a.s;
      if (!disjoint) continue;
      if (a.sample.count() != b.sample.count()) {
        throw UsageError("cross-covariance requires increments over the same paths");
      }
      out.push_back(weighted_covariance_test(
          a.sample.values, b.sample.values,
          a.sample.is_uniform() ? std::span<const double>{} : std::span<const double>(a.sample.weights),
          0.0, "cov" + span_label(a.s, a.t) + span_label(b.s, b.t), z_gate));
    }
  }
  return out;
}

std::vector<TestReport> martingale_z(const WeightedSample& v_s, const WeightedSample& v_t,
                                     const std::vector<FsStatistic>& gs, double z_gate,
                                     const std::string& name_prefix) {
  if (v_s.count() != v_t.count()) {
    throw UsageError("martingale test needs matching sample sizes at s and t");
  }
  const std::size_t n = v_s.values.size();
  std::vector<TestReport> out;
  out.reserve(gs.size());
  for (const auto& g : gs) {
    if (g.values.size() != n) throw UsageError("test statistic length mismatch");
    std::vector<double> prod(n);
    for (std::size_t k = 0; k < n; ++k) {
      prod[k] = (v_t.values[k] - v_s.values[k]) * g.values[k];
    }
    WeightedSample ws(std::move(prod), v_t.weights);
    out.push_back(weighted_mean_test(ws, 0.0, name_prefix + "g=" + g.tag, z_gate));
  }
  return out;
}

RegressionReport linear_regression(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("regression inputs must have equal length");
  if (x.size() < 3) throw UsageError("regression needs at least 3 points");
  const double n = static_cast<double>(x.size());
  const double mx = pairwise_sum(x) / n;
  const double my = pairwise_sum(y) / n;

  std::vector<double> sxx_terms(x.size()), sxy_terms(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx;
    sxx_terms[k] = dx * dx;
    sxy_terms[k] = dx * (y[k] - my);
  }
  const double sxx = pairwise_sum(sxx_terms);
  const double syy_scale = std::max(1.0, std::abs(my));

  RegressionReport r;
  r.n = static_cast<long>(x.size());
  if (!(sxx > 1e-14 * n * syy_scale * syy_scale) || !(sxx > 0.0)) {
    r.inconclusive = true;
    return r;
  }
  r.slope = pairwise_sum(sxy_terms) / sxx;
  r.intercept = my - r.slope * mx;

  std::vector<double> res2(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double e = y[k] - (r.intercept + r.slope * x[k]);
    res2[k] = e * e;
  }
  const double ssr = pairwise_sum(res2);
  const double sigma2 = ssr / (n - 2.0);
  r.slope_se = std::sqrt(sigma2 / sxx);
  r.intercept_se = std::sqrt(sigma2 * (1.0 / n + mx * mx / sxx));
  return r;
}

SuiteSummary summarize(const std::vector<TestReport>& reports) {
  SuiteSummary s;
  s.total = static_cast<int>(reports.size());
  for (const auto& r : reports) {
    if (!r.pass) ++s.failed;
  }
  s.pass = s.failed == 0;
  return s;
}

}  // namespace pettis
