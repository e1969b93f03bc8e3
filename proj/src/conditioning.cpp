#include "pettis/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <utility>

namespace pettis {

Partition::Partition(std::vector<int> cell_of, int num_cells)
    : cell_of_(std::move(cell_of)), num_cells_(num_cells) {
  if (cell_of_.empty()) throw UsageError("partition must cover at least one path");
  if (num_cells_ < 1) throw UsageError("partition needs at least one cell");
  members_.resize(static_cast<std::size_t>(num_cells_));
  for (int k = 0; k < count(); ++k) {
    const int c = cell_of_[static_cast<std::size_t>(k)];
    if (c < 0 || c >= num_cells_) throw UsageError("cell id out of range");
    members_[static_cast<std::size_t>(c)].push_back(k);
  }
  for (const auto& cell : members_) {
    if (cell.empty()) throw UsageError("every partition cell must be nonempty");
  }
}

Partition Partition::trivial(int count) {
  if (count < 1) throw UsageError("partition must cover at least one path");
  return Partition(std::vector<int>(static_cast<std::size_t>(count), 0), 1);
}

Partition Partition::singletons(int count) {
  if (count < 1) throw UsageError("partition must cover at least one path");
  std::vector<int> ids(static_cast<std::size_t>(count));
  std::iota(ids.begin(), ids.end(), 0);
  return Partition(std::move(ids), count);
}

Partition Partition::rank_bins(std::span<const double> values, int num_cells) {
  const int n = static_cast<int>(values.size());
  if (num_cells < 1 || num_cells > n) {
    throw UsageError("rank_bins needs 1 <= num_cells <= count");
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[static_cast<std::size_t>(a)] < values[static_cast<std::size_t>(b)]; });
  std::vector<int> cell_of(static_cast<std::size_t>(n), 0);
  for (int rank = 0; rank < n; ++rank) {
    const int c = static_cast<int>((static_cast<long long>(rank) * num_cells) / n);
    cell_of[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)])] = c;
  }
  return Partition(std::move(cell_of), num_cells);
}

std::vector<Vector> cond_exp_partition(std::span<const Vector> samples, const Partition& part) {
  if (static_cast<int>(samples.size()) != part.count()) {
    throw UsageError("sample count does not match partition");
  }
  const int d = samples.empty() ? 0 : samples.front().dim();
  std::vector<Vector> cell_mean(static_cast<std::size_t>(part.num_cells()), Vector::zero(d));
  std::vector<double> scratch;
  for (int c = 0; c < part.num_cells(); ++c) {
    const auto& ids = part.members()[static_cast<std::size_t>(c)];
    Vector mean = Vector::zero(d);
    scratch.resize(ids.size());
    for (int coord = 0; coord < d; ++coord) {
      for (std::size_t k = 0; k < ids.size(); ++k) {
        scratch[k] = samples[static_cast<std::size_t>(ids[k])][coord];
      }
      mean[coord] = pairwise_sum(scratch) / static_cast<double>(ids.size());
    }
    cell_mean[static_cast<std::size_t>(c)] = std::move(mean);
  }
  std::vector<Vector> out;
  out.reserve(samples.size());
  for (int k = 0; k < part.count(); ++k) {
    out.push_back(cell_mean[static_cast<std::size_t>(part.cell(k))]);
  }
  return out;
}

std::pair<std::vector<Vector>, std::vector<Vector>> pullout(std::span<const Vector> samples,
                                                            std::span<const double> phi,
                                                            const Partition& part) {
  if (static_cast<int>(samples.size()) != part.count() ||
      static_cast<int>(phi.size()) != part.count()) {
    throw UsageError("sample or phi count does not match partition");
  }
  for (int c = 0; c < part.num_cells(); ++c) {
    const auto& ids = part.members()[static_cast<std::size_t>(c)];
    const double v0 = phi[static_cast<std::size_t>(ids.front())];
    for (int k : ids) {
      if (phi[static_cast<std::size_t>(k)] != v0) {
        throw UsageError("phi must be constant on every cell (F-measurable)");
      }
    }
  }
  std::vector<Vector> scaled;
  scaled.reserve(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    scaled.push_back(phi[k] * samples[k]);
  }
  std::vector<Vector> lhs = cond_exp_partition(scaled, part);
  std::vector<Vector> rhs = cond_exp_partition(samples, part);
  for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = phi[k] * rhs[k];
  return {std::move(lhs), std::move(rhs)};
}

GaussianPair::GaussianPair(double mu_t_, double sigma_t_, double mu_u_, double sigma_u_,
                           double rho_)
    : mu_t(mu_t_), sigma_t(sigma_t_), mu_u(mu_u_), sigma_u(sigma_u_), rho(rho_) {
  if (!(sigma_t > 0.0) || !(sigma_u > 0.0)) throw UsageError("sigmas must be positive");
  if (!(std::abs(rho) <= 1.0)) throw UsageError("|rho| must be <= 1");
}

GaussianPair GaussianPair::brownian(double t, double u) {
  if (!(0.0 < t) || !(t <= u)) throw UsageError("brownian pair needs 0 < t <= u");
  return GaussianPair(0.0, std::sqrt(t), 0.0, std::sqrt(u), std::sqrt(t / u));
}

double gaussian_cond_exp(const GaussianPair& p, double z_u) {
  return p.mu_t + p.rho * (p.sigma_t / p.sigma_u) * (z_u - p.mu_u);
}

BridgeKernel::BridgeKernel(double t_, double T_) : t(t_), T(T_) {
  if (!(T > 0.0)) throw UsageError("bridge horizon must be positive");
  if (!(0.0 < t && t < T)) {
    throw DomainError("bridge conditioning time must satisfy 0 < t < T");
  }
}

double bridge_density(const BridgeKernel& k, double x, double w_T) {
  const double t = k.t;
  const double T = k.T;
  const double pref = std::sqrt(T) / (std::sqrt(T - t) * std::sqrt(2.0 * std::numbers::pi * t));
  const double dev = x - w_T * t / T;
  return pref * std::exp(-dev * dev * T / (2.0 * (T - t) * t));
}

ConditionalStatistic ConditionalStatistic::value_at(double t) {
  if (!(t >= 0.0)) throw UsageError("statistic time must be >= 0");
  ConditionalStatistic s;
  s.kind = Kind::ValueAt;
  s.t = t;
  return s;
}

ConditionalStatistic ConditionalStatistic::square_at(double t) {
  ConditionalStatistic s = value_at(t);
  s.kind = Kind::SquareAt;
  return s;
}

ConditionalStatistic ConditionalStatistic::product_at(double s_, double t_) {
  if (!(0.0 <= s_ && s_ <= t_)) throw UsageError("product statistic needs 0 <= s <= t");
  ConditionalStatistic s;
  s.kind = Kind::ProductAt;
  s.s = s_;
  s.t = t_;
  return s;
}

ConditionalStatistic ConditionalStatistic::parse(const std::string& name, double s, double t) {
  if (name == "w_t") return value_at(t);
  if (name == "w_t^2") return square_at(t);
  if (name == "w_s*w_t") return product_at(s, t);
  throw UnsupportedStatisticError(
      "statistic '" + name + "' has no closed-form conditional; supported: w_t, w_t^2, w_s*w_t");
}

double ConditionalStatistic::conditional_mean_given_terminal(double terminal,
                                                             double horizon) const {
  const double T = horizon;
  if (!(t <= T)) throw UsageError("statistic time exceeds horizon");
  const double mean_t = t / T * terminal;
  switch (kind) {
    case Kind::ValueAt:
      return mean_t;
    case Kind::SquareAt:
      return mean_t * mean_t + t * (T - t) / T;
    case Kind::ProductAt: {
      const double mean_s = s / T * terminal;
      const double cov = s * (T - t) / T;  // Cov(w_s, w_t | w_T), s <= t
      return mean_s * mean_t + cov;
    }
  }
  throw UsageError("invalid statistic kind");
}

double n_measure_integral(const ConditionalStatistic& stat, const PathPredicate& event,
                          const PathEnsemble& ensemble) {
  if (!event) throw UsageError("event predicate is empty");
  const TimeGrid& grid = ensemble.grid();
  const double T = grid.horizon();
  if (!(stat.t <= T) || (stat.kind == ConditionalStatistic::Kind::ProductAt && !(stat.s <= T))) {
    throw UsageError("statistic time exceeds horizon");
  }
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(ensemble.count()));
  for (int k = 0; k < ensemble.count(); ++k) {
    const auto w = ensemble.values(k);
    if (!event(w, grid)) continue;
    terms.push_back(stat.conditional_mean_given_terminal(w.back(), T));
  }
  if (terms.empty()) return 0.0;
  return pairwise_sum(terms) / static_cast<double>(ensemble.count());
}

namespace {

ConditionalRegressionReport conditional_regression(double alpha, double s, double t,
                                                   const PathEnsemble& ensemble,
                                                   bool verdict_is_martingale) {
  const TimeGrid& grid = ensemble.grid();
  const double T = grid.horizon();
  const int s_node = grid.node_index(s);
  grid.node_index(t);  // validates t is on the grid
  if (!(s < t)) throw UsageError("conditional regression needs s < t");
  if (!(t <= T)) throw UsageError("conditional regression needs t <= T");

  const std::size_t count = static_cast<std::size_t>(ensemble.count());
  std::vector<double> x(count), xi(count);
  const double scale = t / T * alpha;
  for (std::size_t k = 0; k < count; ++k) {
    const auto w = ensemble.values(static_cast<int>(k));
    x[k] = w[static_cast<std::size_t>(s_node)];
    xi[k] = scale * w.back();  // E(w_t | conditioning level alpha * w_T), by the Gaussian kernel
  }

  ConditionalRegressionReport rep;
  rep.s = s;
  rep.t = t;
  rep.alpha = alpha;
  rep.reg = linear_regression(x, xi);
  rep.inconclusive = rep.reg.inconclusive;
  // Tower property sends the inner conditional to scale * E(w_T | w_s) = scale * w_s.
  rep.target_slope = scale;
  if (rep.inconclusive) return rep;

  const double gate = kDefaultZGate;
  const bool slope_matches_target =
      std::abs(rep.reg.slope - rep.target_slope) <= gate * rep.reg.slope_se;
  const bool intercept_zero = std::abs(rep.reg.intercept) <= gate * rep.reg.intercept_se;
  rep.martingale = std::abs(rep.reg.slope - 1.0) <= gate * rep.reg.slope_se && intercept_zero;
  rep.verdict = verdict_is_martingale ? rep.martingale : (slope_matches_target && intercept_zero);
  return rep;
}

}  // namespace

ConditionalRegressionReport n_martingale_check(double s, double t, const PathEnsemble& ensemble) {
  ConditionalRegressionReport rep = conditional_regression(1.0, s, t, ensemble, false);
  rep.alpha = 0.0;  // not an alpha-sweep entry
  return rep;
}

ConditionalRegressionReport q_kernel_cond(double alpha, double s, double t,
                                          const PathEnsemble& ensemble) {
  if (!(alpha > 0.0)) throw UsageError("alpha must be positive");
  return conditional_regression(alpha, s, t, ensemble, true);
}

BridgeRegressionReport bridge_regression(const PathEnsemble& ensemble, double t, double z_gate) {
  const TimeGrid& grid = ensemble.grid();
  const double T = grid.horizon();
  const int t_node = grid.node_index(t);
  if (!(t > 0.0) || !(t < T)) {
    throw DomainError("bridge regression needs an interior time 0 < t < T");
  }
  const std::size_t count = static_cast<std::size_t>(ensemble.count());
  std::vector<double> wt(count), wT(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto w = ensemble.values(static_cast<int>(k));
    wt[k] = w[static_cast<std::size_t>(t_node)];
    wT[k] = w.back();
  }

  BridgeRegressionReport rep;
  rep.t = t;
  rep.reg = linear_regression(wT, wt);
  if (rep.reg.inconclusive) {
    rep.slope_test = z_test("bridge.slope", 0.0, t / T, 0.0, z_gate);
    rep.slope_test.inconclusive = true;
    rep.cond_var_test = rep.slope_test;
    rep.cond_var_test.name = "bridge.cond_var";
    return rep;
  }
  rep.slope_test = z_test("bridge.slope", rep.reg.slope, t / T, rep.reg.slope_se, z_gate);

  // Residual variance against the pinned-endpoint value t(T-t)/T.
  std::vector<double> resid(count);
  for (std::size_t k = 0; k < count; ++k) {
    resid[k] = wt[k] - (rep.reg.intercept + rep.reg.slope * wT[k]);
  }
  rep.cond_var_test = weighted_variance_test(WeightedSample::uniform(std::move(resid)),
                                             t * (T - t) / T, "bridge.cond_var", z_gate);
  return rep;
}

}  // namespace pettis
