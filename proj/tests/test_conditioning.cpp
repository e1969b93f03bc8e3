#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "pettis/conditioning.hpp"
#include "pettis/report_json.hpp"
#include "pettis/rng.hpp"

using namespace pettis;

namespace {

std::vector<Vector> random_samples(std::uint64_t stream, int count, int dim) {
  std::vector<Vector> out;
  std::uint64_t ctr = 0;
  for (int k = 0; k < count; ++k) {
    std::vector<double> c(static_cast<std::size_t>(dim));
    for (auto& x : c) x = rng::standard_normal(stream, ctr++);
    out.emplace_back(std::move(c));
  }
  return out;
}

std::vector<double> random_scalars(std::uint64_t stream, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = rng::standard_normal(stream, static_cast<std::uint64_t>(k));
  return out;
}

double max_abs_diff(const Vector& a, const Vector& b) {
  double worst = 0.0;
  for (int c = 0; c < a.dim(); ++c) worst = std::max(worst, std::abs(a[c] - b[c]));
  return worst;
}

}  // namespace

TEST_SUITE("conditioning") {

TEST_CASE("partition construction rules") {
  CHECK_THROWS_AS(Partition({0, 2, 0}, 3), UsageError);  // cell 1 empty
  CHECK_THROWS_AS(Partition({0, 3}, 3), UsageError);     // id out of range
  const Partition p = Partition::rank_bins(std::vector<double>{3.0, 1.0, 2.0, 0.0}, 2);
  CHECK(p.num_cells() == 2);
  CHECK(p.cell(3) == 0);  // smallest value in the low bin
  CHECK(p.cell(0) == 1);  // largest value in the high bin
  CHECK_THROWS_AS(Partition::rank_bins(std::vector<double>{1.0}, 2), UsageError);
}

TEST_CASE("trivial sigma-algebra gives the global mean") {
  const auto samples = random_samples(0x1111ull, 64, 3);
  const auto out = cond_exp_partition(samples, Partition::trivial(64));
  for (std::size_t k = 1; k < out.size(); ++k) CHECK(max_abs_diff(out[k], out[0]) == 0.0);
  std::vector<double> coord0;
  for (const auto& s : samples) coord0.push_back(s[0]);
  CHECK(out[0][0] == doctest::Approx(pairwise_sum(coord0) / 64.0).epsilon(1e-15));
}

TEST_CASE("full information is the identity") {
  const auto samples = random_samples(0x2222ull, 32, 2);
  const auto out = cond_exp_partition(samples, Partition::singletons(32));
  for (std::size_t k = 0; k < out.size(); ++k) {
    CHECK(out[k][0] == samples[k][0]);
    CHECK(out[k][1] == samples[k][1]);
  }
}

TEST_CASE("defining equation holds cellwise") {
  const int count = 1000;
  const auto samples = random_samples(0x3333ull, count, 3);
  const auto keys = random_scalars(0x4444ull, count);
  const Partition part = Partition::rank_bins(keys, 4);
  const auto out = cond_exp_partition(samples, part);
  for (int c = 0; c < part.num_cells(); ++c) {
    const auto& ids = part.members()[static_cast<std::size_t>(c)];
    for (int coord = 0; coord < 3; ++coord) {
      std::vector<double> in_terms, out_terms;
      for (int k : ids) {
        in_terms.push_back(samples[static_cast<std::size_t>(k)][coord]);
        out_terms.push_back(out[static_cast<std::size_t>(k)][coord]);
      }
      CHECK(std::abs(pairwise_sum(in_terms) - pairwise_sum(out_terms)) <= 1e-12);
    }
  }
}

TEST_CASE("pull-out property") {
  const int count = 256;
  const auto keys = random_scalars(0x5555ull, count);
  const Partition part = Partition::rank_bins(keys, 8);

  SUBCASE("phi == 1 reduces to the conditional expectation") {
    const auto samples = random_samples(0x6666ull, count, 2);
    const std::vector<double> ones(count, 1.0);
    const auto [lhs, rhs] = pullout(samples, ones, part);
    const auto ce = cond_exp_partition(samples, part);
    for (std::size_t k = 0; k < lhs.size(); ++k) {
      CHECK(max_abs_diff(lhs[k], ce[k]) == 0.0);
      CHECK(max_abs_diff(rhs[k], ce[k]) == 0.0);
    }
  }
  SUBCASE("phi == 0 kills both sides") {
    const auto samples = random_samples(0x7777ull, count, 2);
    const std::vector<double> zeros(count, 0.0);
    const auto [lhs, rhs] = pullout(samples, zeros, part);
    for (std::size_t k = 0; k < lhs.size(); ++k) {
      CHECK(lhs[k][0] == 0.0);
      CHECK(rhs[k][0] == 0.0);
    }
  }
  SUBCASE("dyadic inputs agree exactly") {
    std::vector<Vector> samples;
    std::uint64_t ctr = 0;
    for (int k = 0; k < count; ++k) {
      std::vector<double> c(2);
      for (auto& x : c) {
        x = static_cast<double>(static_cast<int>(rng::mix64(0x8888ull + ++ctr) >> 54) - 512) / 256.0;
      }
      samples.emplace_back(std::move(c));
    }
    std::vector<double> phi(count);
    for (int k = 0; k < count; ++k) phi[static_cast<std::size_t>(k)] = 0.5 * part.cell(k) - 1.0;
    const auto [lhs, rhs] = pullout(samples, phi, part);
    for (std::size_t k = 0; k < lhs.size(); ++k) {
      CHECK(max_abs_diff(lhs[k], rhs[k]) <= 1e-12);
    }
  }
  SUBCASE("phi must be cell-constant") {
    const auto samples = random_samples(0x9999ull, count, 2);
    auto phi = random_scalars(0xAAAA1ull, count);
    CHECK_THROWS_AS(pullout(samples, phi, part), UsageError);
  }
}

TEST_CASE("tower property across a dyadic coarsening") {
  const int count = 512;
  const auto samples = random_samples(0xBBBB1ull, count, 3);
  const auto keys = random_scalars(0xCCCC1ull, count);
  const Partition fine = Partition::rank_bins(keys, 8);
  const Partition coarse = Partition::rank_bins(keys, 2);
  const auto twice = cond_exp_partition(cond_exp_partition(samples, fine), coarse);
  const auto once = cond_exp_partition(samples, coarse);
  for (std::size_t k = 0; k < once.size(); ++k) {
    CHECK(max_abs_diff(twice[k], once[k]) <= 1e-12);
  }
}

TEST_CASE("Gaussian conditional expectation formula") {
  CHECK(gaussian_cond_exp(GaussianPair(1.5, 2.0, -3.0, 4.0, 0.0), 100.0) == 1.5);
  // Brownian pair at t = 0.25, u = 1: slope rho sigma_t / sigma_u = t/u.
  const GaussianPair bp = GaussianPair::brownian(0.25, 1.0);
  CHECK(bp.sigma_t == doctest::Approx(0.5));
  CHECK(bp.rho == doctest::Approx(0.5));
  CHECK(gaussian_cond_exp(bp, 2.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(gaussian_cond_exp(GaussianPair(1.5, 2.0, -3.0, 4.0, 0.7), -3.0) == 1.5);
  CHECK_THROWS_AS(GaussianPair(0.0, 0.0, 0.0, 1.0, 0.5), UsageError);
  CHECK_THROWS_AS(GaussianPair(0.0, 1.0, 0.0, 1.0, 1.5), UsageError);
}

TEST_CASE("bridge density formula") {
  const BridgeKernel k(0.5, 1.0);
  CHECK(bridge_density(k, 0.0, 0.0) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-12));
  CHECK(bridge_density(k, 0.0, 0.0) == doctest::Approx(0.79788).epsilon(1e-4));

  SUBCASE("pointwise equal to the Gaussian density") {
    for (const auto& p : {std::pair{0.25, -1.0}, std::pair{0.5, 0.0}, std::pair{0.75, 2.0}}) {
      const BridgeKernel kern(p.first, 1.0);
      const double mean = p.first * p.second;
      const double variance = p.first * (1.0 - p.first);
      for (int i = -40; i <= 40; ++i) {
        const double x = mean + 0.15 * i;
        CHECK(std::abs(bridge_density(kern, x, p.second) -
                       oracles::normal_pdf(x, mean, variance)) <= 1e-12);
      }
    }
  }
  SUBCASE("symmetry about the conditional mean") {
    const BridgeKernel kern(0.3, 2.0);
    const double mean = 0.3 / 2.0 * 1.7;
    for (int i = 1; i <= 20; ++i) {
      const double delta = 0.1 * i;
      CHECK(std::abs(bridge_density(kern, mean + delta, 1.7) -
                     bridge_density(kern, mean - delta, 1.7)) <= 1e-12);
    }
  }
  SUBCASE("normalizes to one") {
    const BridgeKernel kern(0.25, 1.0);
    const double mean = 0.25 * -0.8;
    const double sd = std::sqrt(0.25 * 0.75);
    const int n = 4000;
    const double lo = mean - 8.0 * sd, hi = mean + 8.0 * sd;
    const double h = (hi - lo) / n;
    double acc = 0.5 * (bridge_density(kern, lo, -0.8) + bridge_density(kern, hi, -0.8));
    for (int i = 1; i < n; ++i) acc += bridge_density(kern, lo + h * i, -0.8);
    CHECK(std::abs(acc * h - 1.0) <= 1e-6);
  }
  SUBCASE("degenerate conditioning times are rejected") {
    CHECK_THROWS_AS(BridgeKernel(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(BridgeKernel(1.0, 1.0), DomainError);
  }
}

TEST_CASE("conditional statistic catalog") {
  const ConditionalStatistic wt = ConditionalStatistic::parse("w_t", 0.0, 0.5);
  CHECK(wt.conditional_mean_given_terminal(2.0, 1.0) == doctest::Approx(1.0));
  const ConditionalStatistic wt2 = ConditionalStatistic::parse("w_t^2", 0.0, 0.5);
  CHECK(wt2.conditional_mean_given_terminal(2.0, 1.0) == doctest::Approx(1.0 + 0.25));
  const ConditionalStatistic prod = ConditionalStatistic::parse("w_s*w_t", 0.25, 0.5);
  // (s t / T^2) w_T^2 + s(T - t)/T
  CHECK(prod.conditional_mean_given_terminal(2.0, 1.0) == doctest::Approx(0.5 + 0.125));
  CHECK_THROWS_AS(ConditionalStatistic::parse("w_t^3", 0.0, 0.5), UnsupportedStatisticError);
}

TEST_CASE("conditional measure integrals") {
  const int count = 20000;
  const TimeGrid grid(1.0, 64);
  const PathEnsemble ens = sample_brownian(grid, 0xDDDD2024ull, count);

  SUBCASE("empty event integrates to zero") {
    const double v = n_measure_integral(ConditionalStatistic::value_at(0.5),
                                        [](std::span<const double>, const TimeGrid&) { return false; },
                                        ens);
    CHECK(v == 0.0);
  }
  SUBCASE("conditioning on itself is the plain mean over the event") {
    const PathPredicate positive_end = [](std::span<const double> w, const TimeGrid&) {
      return w.back() > 0.0;
    };
    const double v = n_measure_integral(ConditionalStatistic::value_at(1.0), positive_end, ens);
    std::vector<double> terms;
    for (int k = 0; k < count; ++k) {
      const auto w = ens.values(k);
      if (w.back() > 0.0) terms.push_back(w.back());
    }
    CHECK(v == doctest::Approx(pairwise_sum(terms) / count).epsilon(1e-14));
  }
  SUBCASE("full-space integral of w_t matches the scaled terminal mean") {
    const double v = n_measure_integral(ConditionalStatistic::value_at(0.5),
                                        [](std::span<const double>, const TimeGrid&) { return true; },
                                        ens);
    std::vector<double> terminal(count);
    for (int k = 0; k < count; ++k) terminal[static_cast<std::size_t>(k)] = ens.values(k).back();
    const auto m = wmean(WeightedSample::uniform(terminal));
    CHECK(v == doctest::Approx(0.5 * m.mean).epsilon(1e-12));
    CHECK(std::abs(v) <= 3.0 * 0.5 * m.se);
  }
}

TEST_CASE("conditional-measure regression: slope is t/T, not 1") {
  const int count = 20000;
  const PathEnsemble ens = sample_brownian(TimeGrid(1.0, 64), 0xEEEE2024ull, count);
  const ConditionalRegressionReport rep = n_martingale_check(0.25, 0.5, ens);
  CHECK_FALSE(rep.inconclusive);
  CHECK(rep.target_slope == doctest::Approx(0.5));
  CHECK(std::abs(rep.reg.slope - 0.5) <= 3.0 * rep.reg.slope_se);
  CHECK(std::abs(rep.reg.intercept) <= 3.0 * rep.reg.intercept_se);
  CHECK(rep.verdict);
  CHECK_FALSE(rep.martingale);  // slope 0.5 is far from 1

  const ConditionalRegressionReport horizon = n_martingale_check(0.25, 1.0, ens);
  CHECK(horizon.target_slope == doctest::Approx(1.0));
  CHECK(horizon.martingale);  // recovered at t = T

  const ConditionalRegressionReport degenerate = n_martingale_check(0.0, 0.5, ens);
  CHECK(degenerate.inconclusive);
}

TEST_CASE("alpha-scaled kernel: martingale only at alpha = T/t") {
  const int count = 20000;
  const PathEnsemble ens = sample_brownian(TimeGrid(1.0, 64), 0xFFFF2024ull, count);
  const double s = 0.25, t = 0.5;

  const ConditionalRegressionReport good = q_kernel_cond(2.0, s, t, ens);
  CHECK(good.verdict);
  CHECK(std::abs(good.reg.slope - 1.0) <= 3.0 * good.reg.slope_se);

  const ConditionalRegressionReport literal = q_kernel_cond(0.5, s, t, ens);
  CHECK_FALSE(literal.verdict);
  CHECK(literal.target_slope == doctest::Approx(0.25));
  CHECK(std::abs(literal.reg.slope - 0.25) <= 3.0 * literal.reg.slope_se);

  const ConditionalRegressionReport unit = q_kernel_cond(1.0, s, t, ens);
  CHECK_FALSE(unit.verdict);
  CHECK(std::abs(unit.reg.slope - 0.5) <= 3.0 * unit.reg.slope_se);

  const ConditionalRegressionReport horizon = q_kernel_cond(1.0, s, 1.0, ens);
  CHECK(horizon.verdict);

  CHECK_THROWS_AS(q_kernel_cond(-1.0, s, t, ens), UsageError);
}

TEST_CASE("bridge regression recovers slope and conditional variance") {
  const int count = 20000;
  const PathEnsemble ens = sample_brownian(TimeGrid(1.0, 64), 0xABAB2024ull, count);
  const BridgeRegressionReport rep = bridge_regression(ens, 0.5);
  CHECK(rep.slope_test.target == doctest::Approx(0.5));
  CHECK(rep.slope_test.pass);
  CHECK(rep.cond_var_test.target == doctest::Approx(0.25));
  CHECK(rep.cond_var_test.pass);
  CHECK_THROWS_AS(bridge_regression(ens, 1.0), DomainError);

  const OrderedJson j = to_json(rep);
  for (const char* key : {"slope", "slope_se", "intercept", "intercept_se", "verdict"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["verdict"] == "PASS");
}

TEST_CASE("regression report serialization") {
  const PathEnsemble ens = sample_brownian(TimeGrid(1.0, 32), 0xCDCD2024ull, 5000);
  const OrderedJson j = to_json(n_martingale_check(0.25, 0.5, ens));
  for (const char* key : {"slope", "slope_se", "intercept", "intercept_se", "verdict"}) {
    CHECK(j.contains(key));
  }
}

}  // TEST_SUITE
