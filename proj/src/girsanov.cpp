#include "pettis/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <utility>

namespace pettis {

std::vector<double> MeasureWeights::linear() const {
  const double mx = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> u(log_weights.size());
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = std::exp(log_weights[k] - mx);
  return u;
}

MeasureWeights MeasureWeights::from_log(std::vector<double> lws) {
  if (lws.empty()) throw UsageError("weights must be nonempty");
  for (double lw : lws) {
    if (!std::isfinite(lw)) {
      throw NumericError("log weight is not finite; the measures are not equivalent");
    }
  }
  MeasureWeights w;
  w.log_weights = std::move(lws);
  const auto u = w.linear();
  std::vector<double> u2(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) u2[k] = u[k] * u[k];
  const double su = pairwise_sum(u);
  const double su2 = pairwise_sum(u2);
  const double mx = *std::max_element(w.log_weights.begin(), w.log_weights.end());
  w.log_norm = mx + std::log(su);
  w.ess = su * su / su2;
  w.degenerate = w.ess < kEssDegenerateFraction * static_cast<double>(w.count());
  return w;
}

MeasureWeights MeasureWeights::uniform(int count) {
  if (count < 1) throw UsageError("weights must be nonempty");
  return from_log(std::vector<double>(static_cast<std::size_t>(count), 0.0));
}

ScalarPath log_exp_martingale(const ScalarField& theta, const ScalarPath& w) {
  const TimeGrid& grid = w.grid;
  const double dt = grid.dt();
  std::vector<double> out(w.values.size(), 0.0);
  double acc = 0.0;
  for (int i = 0; i < grid.steps(); ++i) {
    const std::size_t iu = static_cast<std::size_t>(i);
    const double th = theta(grid.node(i));
    acc += -0.5 * th * th * dt - th * (w.values[iu + 1] - w.values[iu]);
    if (!std::isfinite(acc)) throw NumericError("log exponential martingale overflow");
    out[iu + 1] = acc;
  }
  return ScalarPath(grid, std::move(out));
}

ScalarPath exp_martingale(const ScalarField& theta, const ScalarPath& w) {
  ScalarPath log_y = log_exp_martingale(theta, w);
  std::vector<double> y(log_y.values.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    y[k] = std::exp(log_y.values[k]);
    if (!std::isfinite(y[k])) {
      std::ostringstream os;
      os << "exponential martingale overflow (log value " << log_y.values[k] << ")";
      throw NumericError(os.str());
    }
  }
  return ScalarPath(w.grid, std::move(y));
}

MeasureWeights weights_from(const ScalarField& theta, const PathEnsemble& ensemble) {
  const TimeGrid& grid = ensemble.grid();
  const int n = grid.steps();
  const double dt = grid.dt();
  std::vector<double> th(static_cast<std::size_t>(n));
  double theta2_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    th[static_cast<std::size_t>(i)] = theta(grid.node(i));
    theta2_sum += th[static_cast<std::size_t>(i)] * th[static_cast<std::size_t>(i)] * dt;
  }
  const double half = 0.5 * theta2_sum;

  std::vector<double> lws(static_cast<std::size_t>(ensemble.count()));
  for (int k = 0; k < ensemble.count(); ++k) {
    const auto w = ensemble.values(k);
    double stoch = 0.0;
    for (int i = 0; i < n; ++i) {
      stoch += th[static_cast<std::size_t>(i)] *
               (w[static_cast<std::size_t>(i) + 1] - w[static_cast<std::size_t>(i)]);
    }
    lws[static_cast<std::size_t>(k)] = -half - stoch;
  }
  return MeasureWeights::from_log(std::move(lws));
}

ScalarPath shift_brownian(const ScalarPath& w, const ScalarField& r) {
  const auto cum_r = lebesgue_prefix(r, w.grid);
  std::vector<double> shifted(w.values.size());
  for (std::size_t k = 0; k < shifted.size(); ++k) shifted[k] = w.values[k] + cum_r[k];
  return ScalarPath(w.grid, std::move(shifted));
}

namespace {

double l2_norm(const Vector& v) {
  double acc = 0.0;
  for (double x : v.coords) acc += x * x;
  return std::sqrt(acc);
}

// r at one node, or throws NoValidRError when no scalar works.
double link_at(const Vector& psi, const Vector& phi, double t, double prop_tol) {
  double num = 0.0, den = 0.0;
  for (int c = 0; c < psi.dim(); ++c) {
    num += psi[c] * phi[c];
    den += phi[c] * phi[c];
  }
  const double psi_norm = l2_norm(psi);
  if (den == 0.0) {
    if (psi_norm == 0.0) return 0.0;
    std::ostringstream os;
    os << "no valid r at t=" << t << ": drift is nonzero where diffusion vanishes";
    throw NoValidRError(os.str());
  }
  const double r = num / den;
  Vector resid = psi;
  for (int c = 0; c < resid.dim(); ++c) resid[c] -= r * phi[c];
  if (l2_norm(resid) > prop_tol * psi_norm) {
    std::ostringstream os;
    os << "no valid r at t=" << t << ": drift and diffusion are not proportional";
    throw NoValidRError(os.str());
  }
  return r;
}

}  // namespace

ScalarField drift_cancel_r(const VectorField& psi, const VectorField& phi, const TimeGrid& grid,
                           double prop_tol) {
  if (psi.dim != phi.dim) throw UsageError("drift and diffusion dimensions differ");
  std::vector<double> r_nodes(static_cast<std::size_t>(grid.num_nodes()));
  for (int i = 0; i < grid.num_nodes(); ++i) {
    const double t = grid.node(i);
    r_nodes[static_cast<std::size_t>(i)] = link_at(psi(t), phi(t), t, prop_tol);
  }
  return ScalarField{[grid, r = std::move(r_nodes)](double t) {
    return r[static_cast<std::size_t>(grid.node_index(t))];
  }};
}

GirsanovSetup GirsanovSetup::make(const TimeGrid& grid, VectorField psi, VectorField phi,
                                  ScalarField r, double prop_tol) {
  if (psi.dim != phi.dim) throw UsageError("drift and diffusion dimensions differ");
  double r2_sum = 0.0;
  for (int i = 0; i < grid.num_nodes(); ++i) {
    const double t = grid.node(i);
    const double rt = r(t);
    const Vector p = psi(t);
    const Vector f = phi(t);
    Vector resid = p;
    for (int c = 0; c < resid.dim(); ++c) resid[c] -= rt * f[c];
    const double gate = prop_tol * std::max(l2_norm(p), l2_norm(f) * std::abs(rt));
    if (l2_norm(resid) > gate) {
      std::ostringstream os;
      os << "psi(t) != r(t) phi(t) at t=" << t;
      throw NoValidRError(os.str());
    }
    if (i < grid.steps()) r2_sum += rt * rt * grid.dt();
  }
  if (!(r2_sum <= kNovikovSurrogateMax)) {
    throw NumericError("sum r^2 dt exceeds the exponential-weight overflow threshold");
  }
  return GirsanovSetup{grid, std::move(psi), std::move(phi), std::move(r)};
}

GirsanovSetup GirsanovSetup::make_auto(const TimeGrid& grid, VectorField psi, VectorField phi,
                                       double prop_tol) {
  ScalarField r = drift_cancel_r(psi, phi, grid, prop_tol);
  return make(grid, std::move(psi), std::move(phi), std::move(r), prop_tol);
}

namespace {

struct NodeTables {
  int n = 0;               // steps
  int m = 0;               // family size
  int d = 0;               // dimension
  double dt = 0.0;
  std::vector<double> r;          // n
  std::vector<double> psi_pair;   // m x n
  std::vector<double> phi_pair;   // m x n
  std::vector<double> phi_coord;  // d x n
  std::vector<double> cum_drift_pair;  // m x (n+1): sum_{i<k} f_j(Psi(t_i)) dt
  std::vector<double> cum_phir_coord;  // d x (n+1): sum_{i<k} Phi_c(t_i) r_i dt
  std::vector<double> cum_r;           // n+1
};

NodeTables build_tables(const GirsanovSetup& setup, const DualFamily& family) {
  NodeTables tb;
  const TimeGrid& grid = setup.grid;
  tb.n = grid.steps();
  tb.m = family.size();
  tb.d = family.dim();
  tb.dt = grid.dt();
  const std::size_t n = static_cast<std::size_t>(tb.n);
  const std::size_t m = static_cast<std::size_t>(tb.m);
  const std::size_t d = static_cast<std::size_t>(tb.d);
  tb.r.resize(n);
  tb.psi_pair.resize(m * n);
  tb.phi_pair.resize(m * n);
  tb.phi_coord.resize(d * n);
  tb.cum_drift_pair.assign(m * (n + 1), 0.0);
  tb.cum_phir_coord.assign(d * (n + 1), 0.0);
  tb.cum_r.assign(n + 1, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const double t = grid.node(static_cast<int>(i));
    const Vector psi = setup.psi(t);
    const Vector phi = setup.phi(t);
    tb.r[i] = setup.r(t);
    for (std::size_t j = 0; j < m; ++j) {
      tb.psi_pair[j * n + i] = apply(family.member(static_cast<int>(j)), psi);
      tb.phi_pair[j * n + i] = apply(family.member(static_cast<int>(j)), phi);
    }
    for (std::size_t c = 0; c < d; ++c) tb.phi_coord[c * n + i] = phi[static_cast<int>(c)];
  }
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      tb.cum_drift_pair[j * (n + 1) + i + 1] =
          tb.cum_drift_pair[j * (n + 1) + i] + tb.psi_pair[j * n + i] * tb.dt;
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      tb.cum_phir_coord[c * (n + 1) + i + 1] =
          tb.cum_phir_coord[c * (n + 1) + i] + tb.phi_coord[c * n + i] * tb.r[i] * tb.dt;
    }
  }
  for (std::size_t i = 0; i < n; ++i) tb.cum_r[i + 1] = tb.cum_r[i] + tb.r[i] * tb.dt;
  return tb;
}

}  // namespace

GirsanovReport girsanov_certify(const GirsanovSetup& setup, const PathEnsemble& ensemble,
                                const DualFamily& family, const NormedSpace& space,
                                const CertifyOptions& options) {
  if (!(ensemble.grid() == setup.grid)) throw UsageError("ensemble grid does not match setup");
  if (family.dim() != setup.psi.dim) throw UsageError("family dimension does not match fields");
  if (space.dim != family.dim()) throw UsageError("space dimension does not match family");
  if (!family.spanning()) throw UsageError("certification requires a spanning family");

  const TimeGrid& grid = setup.grid;

  // Defaults live at the quarter nodes; grids whose step count is not a
  // multiple of four snap to the nearest interior nodes.
  std::vector<std::pair<int, int>> pair_nodes;
  std::vector<int> cut_nodes;
  if (options.martingale_pairs.empty() || options.increment_cuts.empty()) {
    if (grid.steps() < 4) throw UsageError("certification needs at least 4 grid steps");
  }
  if (options.martingale_pairs.empty()) {
    const int q1 = std::max(1, grid.steps() / 4);
    const int q2 = std::max(q1 + 1, grid.steps() / 2);
    const int q3 = std::max(q2 + 1, 3 * grid.steps() / 4);
    pair_nodes = {{q1, q2}, {q2, q3}, {q1, grid.steps()}};
  } else {
    for (const auto& [s, t] : options.martingale_pairs) {
      const int is = grid.node_index(s);
      const int it = grid.node_index(t);
      if (!(is < it)) throw UsageError("martingale pair must satisfy s < t");
      pair_nodes.emplace_back(is, it);
    }
  }
  if (options.increment_cuts.empty()) {
    const int q1 = std::max(1, grid.steps() / 4);
    const int q2 = std::max(q1 + 1, grid.steps() / 2);
    const int q3 = std::max(q2 + 1, 3 * grid.steps() / 4);
    cut_nodes = {0, q1, q2, q3, grid.steps()};
  } else {
    for (double c : options.increment_cuts) cut_nodes.push_back(grid.node_index(c));
  }
  for (std::size_t q = 1; q < cut_nodes.size(); ++q) {
    if (!(cut_nodes[q - 1] < cut_nodes[q])) {
      throw UsageError("increment cuts must be strictly increasing");
    }
  }
  CertifyOptions opts = options;

  const NodeTables tb = build_tables(setup, family);
  const std::size_t n = static_cast<std::size_t>(tb.n);
  const std::size_t m = static_cast<std::size_t>(tb.m);
  const std::size_t d = static_cast<std::size_t>(tb.d);
  const std::size_t count = static_cast<std::size_t>(ensemble.count());
  const std::size_t num_pairs = pair_nodes.size();
  const std::size_t num_incs = cut_nodes.size() - 1;

  // Radon-Nikodym weights for the scoring measure.
  MeasureWeights weights = MeasureWeights::uniform(static_cast<int>(count));
  if (!opts.uniform_weights) {
    double half = 0.0;
    for (std::size_t i = 0; i < n; ++i) half += 0.5 * tb.r[i] * tb.r[i] * tb.dt;
    std::vector<double> lws(count);
    for (std::size_t k = 0; k < count; ++k) {
      const auto w = ensemble.values(static_cast<int>(k));
      double stoch = 0.0;
      for (std::size_t i = 0; i < n; ++i) stoch += tb.r[i] * (w[i + 1] - w[i]);
      lws[k] = -half - stoch;
    }
    weights = MeasureWeights::from_log(std::move(lws));
  }
  const std::vector<double> u = weights.linear();

  // Per-path collections.
  std::vector<std::vector<double>> af_s(num_pairs * m, std::vector<double>(count));
  std::vector<std::vector<double>> af_t(num_pairs * m, std::vector<double>(count));
  std::vector<std::vector<double>> w_at_s(num_pairs, std::vector<double>(count));
  std::vector<std::vector<double>> w_inc(num_incs, std::vector<double>(count));

  double drift_residual = 0.0;
  double weak_residual = 0.0;

  const std::vector<double>& pinv = family.pseudo_inverse();
  std::vector<double> ito(m);
  std::vector<double> stoch_coord(d);
  std::vector<double> pairings(m);
  Vector a_vec = Vector::zero(static_cast<int>(d));
  Vector direct = Vector::zero(static_cast<int>(d));

  for (std::size_t k = 0; k < count; ++k) {
    const auto w = ensemble.values(static_cast<int>(k));
    std::fill(ito.begin(), ito.end(), 0.0);
    std::fill(stoch_coord.begin(), stoch_coord.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i > 0) {
        const double dw = w[i] - w[i - 1];
        for (std::size_t j = 0; j < m; ++j) ito[j] += tb.phi_pair[j * n + (i - 1)] * dw;
        for (std::size_t c = 0; c < d; ++c) stoch_coord[c] += tb.phi_coord[c * n + (i - 1)] * dw;
      }
      // A(t_i) from the per-functional route, reconstructed.
      for (std::size_t j = 0; j < m; ++j) pairings[j] = tb.cum_drift_pair[j * (n + 1) + i] + ito[j];
      for (std::size_t c = 0; c < d; ++c) {
        const double* row = pinv.data() + c * m;
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += row[j] * pairings[j];
        a_vec[static_cast<int>(c)] = acc;
      }
      weak_residual = std::max(weak_residual, family.residual(pairings, a_vec));
      // Direct coordinatewise sum of Phi against the shifted increments.
      for (std::size_t c = 0; c < d; ++c) {
        direct[static_cast<int>(c)] =
            a_vec[static_cast<int>(c)] - (stoch_coord[c] + tb.cum_phir_coord[c * (n + 1) + i]);
      }
      drift_residual = std::max(drift_residual, space.norm(direct));

      for (std::size_t p = 0; p < num_pairs; ++p) {
        if (static_cast<int>(i) == pair_nodes[p].first) {
          for (std::size_t j = 0; j < m; ++j) {
            af_s[p * m + j][k] = apply(family.member(static_cast<int>(j)), a_vec);
          }
          w_at_s[p][k] = w[i];
        }
        if (static_cast<int>(i) == pair_nodes[p].second) {
          for (std::size_t j = 0; j < m; ++j) {
            af_t[p * m + j][k] = apply(family.member(static_cast<int>(j)), a_vec);
          }
        }
      }
    }
    for (std::size_t q = 0; q < num_incs; ++q) {
      const std::size_t a = static_cast<std::size_t>(cut_nodes[q]);
      const std::size_t b = static_cast<std::size_t>(cut_nodes[q + 1]);
      w_inc[q][k] = (w[b] + tb.cum_r[b]) - (w[a] + tb.cum_r[a]);
    }
  }

  GirsanovReport report;
  report.ess = weights.ess;
  report.ess_fraction = weights.ess_fraction();
  report.weights_degenerate = weights.degenerate;
  report.log_weights_finite = true;
  report.drift_residual = drift_residual;
  report.weak_residual = weak_residual;

  // Unweighted mean of y_T, the surrogate for the weights' martingale property.
  {
    std::vector<double> y(count);
    for (std::size_t k = 0; k < count; ++k) y[k] = std::exp(weights.log_weights[k]);
    const auto mr = wmean(WeightedSample::uniform(std::move(y)));
    report.weight_mean = mr.mean;
    report.weight_mean_se = mr.se;
    ZScoreEntry e;
    e.kind = "weight";
    e.stat = "mean_y_T";
    e.test = z_test("weight.mean_y_T", mr.mean, 1.0, mr.se, opts.z_gate);
    report.z_scores.push_back(std::move(e));
  }

  // Martingale z-tests of the paired process under the scoring measure.
  for (std::size_t p = 0; p < num_pairs; ++p) {
    const auto [s_node, t_node] = pair_nodes[p];
    const double s_time = grid.node(s_node);
    const double t_time = grid.node(t_node);
    std::vector<FsStatistic> gs;
    {
      FsStatistic one{"1", std::vector<double>(count, 1.0)};
      FsStatistic ws{"w_s", w_at_s[p]};
      FsStatistic ws2{"w_s^2", std::vector<double>(count)};
      FsStatistic sgn{"sign(w_s)", std::vector<double>(count)};
      for (std::size_t k = 0; k < count; ++k) {
        const double x = w_at_s[p][k];
        ws2.values[k] = x * x;
        sgn.values[k] = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
      }
      gs = {std::move(one), std::move(ws), std::move(ws2), std::move(sgn)};
    }
    for (std::size_t j = 0; j < m; ++j) {
      char prefix[96];
      std::snprintf(prefix, sizeof(prefix), "mart.f%zu.(%g,%g).", j, s_time, t_time);
      const auto reports = martingale_z(WeightedSample(af_s[p * m + j], u),
                                        WeightedSample(af_t[p * m + j], u), gs, opts.z_gate,
                                        prefix);
      for (std::size_t gi = 0; gi < gs.size(); ++gi) {
        ZScoreEntry e;
        e.kind = "martingale";
        e.functional = static_cast<int>(j);
        e.s = s_time;
        e.t = t_time;
        e.stat = gs[gi].tag;
        e.test = reports[gi];
        report.z_scores.push_back(std::move(e));
      }
    }
  }

  // Moment checks of the shifted increments under the scoring measure.
  {
    std::vector<IncrementSample> incs;
    incs.reserve(num_incs);
    for (std::size_t q = 0; q < num_incs; ++q) {
      incs.push_back(IncrementSample{grid.node(cut_nodes[q]), grid.node(cut_nodes[q + 1]),
                                     WeightedSample(w_inc[q], u)});
    }
    const auto reports = brownian_law_check(incs, opts.z_gate);
    // brownian_law_check order: four moment tests per increment, then the
    // cross-covariances of disjoint pairs in (i, j) order.
    std::size_t idx = 0;
    for (std::size_t q = 0; q < num_incs; ++q) {
      for (const char* stat : {"mean", "var", "skew", "exkurt"}) {
        ZScoreEntry e;
        e.kind = "increment";
        e.s = incs[q].s;
        e.t = incs[q].t;
        e.stat = stat;
        e.test = reports[idx++];
        report.z_scores.push_back(std::move(e));
      }
    }
    for (std::size_t i = 0; i < num_incs; ++i) {
      for (std::size_t j = i + 1; j < num_incs; ++j) {
        ZScoreEntry e;
        e.kind = "increment";
        e.s = incs[i].s;
        e.t = incs[i].t;
        e.stat = "cross_cov";
        e.test = reports[idx++];
        report.z_scores.push_back(std::move(e));
      }
    }
    if (idx != reports.size()) throw NumericError("increment report bookkeeping mismatch");
  }

  report.inconclusive = weights.degenerate;
  bool all_pass = report.drift_residual <= kDriftResidualGate &&
                  report.weak_residual <= kWeakConsistencyTol && !report.inconclusive;
  for (const auto& e : report.z_scores) {
    if (!e.test.pass) all_pass = false;
  }
  report.pass = all_pass;
  return report;
}

}  // namespace pettis
