#include "pettis/validate.hpp"

#include <cmath>
#include <numbers>

#include "pettis/conditioning.hpp"
#include "pettis/integrate.hpp"
#include "pettis/rng.hpp"
#include "pettis/stats.hpp"
#include "pettis/vecspace.hpp"

namespace pettis {

namespace {

constexpr std::uint64_t kFamilyAStream = 0xA11CEull;
constexpr std::uint64_t kFamilyBStream = 0xB0B0ull;
constexpr std::uint64_t kVectorStream = 0xCAFEull;
constexpr std::uint64_t kSampleStream = 0xD1CEull;

DualFamily gaussian_family(std::uint64_t stream, int dim, int size) {
  std::vector<Functional> fs;
  fs.reserve(static_cast<std::size_t>(size));
  std::uint64_t ctr = 0;
  for (int j = 0; j < size; ++j) {
    std::vector<double> c(static_cast<std::size_t>(dim));
    for (auto& x : c) x = rng::standard_normal(stream, ctr++);
    fs.emplace_back(std::move(c));
  }
  return DualFamily(std::move(fs), true);
}

Vector gaussian_vector(std::uint64_t stream, int dim, std::uint64_t& ctr) {
  std::vector<double> c(static_cast<std::size_t>(dim));
  for (auto& x : c) x = rng::standard_normal(stream, ctr++);
  return Vector(std::move(c));
}

std::vector<double> pairings_of(const DualFamily& family, const Vector& v) {
  std::vector<double> p(static_cast<std::size_t>(family.size()));
  for (int j = 0; j < family.size(); ++j) p[static_cast<std::size_t>(j)] = apply(family.member(j), v);
  return p;
}

double max_abs_diff(const Vector& a, const Vector& b) {
  double worst = 0.0;
  for (int c = 0; c < a.dim(); ++c) worst = std::max(worst, std::abs(a[c] - b[c]));
  return worst;
}

GateResult gate(std::string name, double residual, double threshold) {
  return GateResult{std::move(name), residual, threshold, residual <= threshold};
}

GateResult vecspace_round_trip() {
  const int d = 3;
  const DualFamily family = gaussian_family(kFamilyAStream, d, 2 * d);
  std::uint64_t ctr = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const Vector v = gaussian_vector(kVectorStream, d, ctr);
    const Vector back = family.reconstruct(pairings_of(family, v));
    worst = std::max(worst, max_abs_diff(back, v));
  }
  return gate("vecspace.round_trip", worst, 1e-10);
}

GateResult vecspace_family_independence() {
  const int d = 3;
  const DualFamily a = gaussian_family(kFamilyAStream, d, 2 * d);
  const DualFamily b = gaussian_family(kFamilyBStream, d, d + 2);
  std::uint64_t ctr = 1000;
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const Vector v = gaussian_vector(kVectorStream, d, ctr);
    const Vector va = a.reconstruct(pairings_of(a, v));
    const Vector vb = b.reconstruct(pairings_of(b, v));
    worst = std::max(worst, max_abs_diff(va, vb));
  }
  return gate("vecspace.family_independence", worst, 1e-10);
}

GateResult vecspace_linearity() {
  const int d = 3;
  const DualFamily family = gaussian_family(kFamilyAStream, d, 2 * d);
  std::uint64_t ctr = 2000;
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const Vector v = gaussian_vector(kVectorStream, d, ctr);
    const Vector w = gaussian_vector(kVectorStream, d, ctr);
    const auto pv = pairings_of(family, v);
    const auto pw = pairings_of(family, w);
    const double a = 1.25, b = -0.75;
    std::vector<double> combo(pv.size());
    for (std::size_t j = 0; j < pv.size(); ++j) combo[j] = a * pv[j] + b * pw[j];
    const Vector lhs = family.reconstruct(combo);
    const Vector rhs = a * family.reconstruct(pv) + b * family.reconstruct(pw);
    worst = std::max(worst, max_abs_diff(lhs, rhs));
  }
  return gate("vecspace.linearity", worst, 1e-10);
}

GateResult product_measure_identity() {
  const TimeGrid grid(1.0, 256);
  const Polynomial phi({0.3, -1.2, 0.8});
  const PolyVectorField density({Polynomial({1.0, 0.5}), Polynomial({0.0, -0.25, 0.6}),
                                 Polynomial({-0.7, 0.0, 0.0, 0.4})});
  const DualFamily family = gaussian_family(kFamilyAStream, 3, 6);
  const VectorMeasureDensity measure{grid, density.field()};

  // Product density for the direct coordinatewise route.
  std::vector<Polynomial> prod;
  for (const auto& c : density.coords) prod.push_back(phi * c);
  const PolyVectorField product(prod);

  double worst = 0.0;
  for (double up_to : {0.25, 0.5, 1.0}) {
    const Vector lhs = bds_integral(phi.field(), measure, family, up_to);
    const Vector rhs = coordinatewise_integral(product.field(), grid, up_to);
    worst = std::max(worst, max_abs_diff(lhs, rhs));
  }
  return gate("integrate.scalar_vs_vector_measure_identity", worst, 1e-10);
}

std::vector<Vector> synthetic_samples(int count, int dim, std::uint64_t stream) {
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  std::uint64_t ctr = 0;
  for (int k = 0; k < count; ++k) out.push_back(gaussian_vector(stream, dim, ctr));
  return out;
}

std::vector<double> synthetic_scalars(int count, std::uint64_t stream, std::uint64_t offset) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    out[static_cast<std::size_t>(k)] = rng::standard_normal(stream, offset + static_cast<std::uint64_t>(k));
  }
  return out;
}

GateResult partition_defining_equation() {
  const int count = 512;
  const auto samples = synthetic_samples(count, 3, kSampleStream);
  const auto keys = synthetic_scalars(count, kSampleStream, 100000);
  const Partition part = Partition::rank_bins(keys, 4);
  const auto out = cond_exp_partition(samples, part);

  double worst = 0.0;
  std::vector<double> in_terms, out_terms;
  for (int c = 0; c < part.num_cells(); ++c) {
    const auto& ids = part.members()[static_cast<std::size_t>(c)];
    for (int coord = 0; coord < 3; ++coord) {
      in_terms.clear();
      out_terms.clear();
      for (int k : ids) {
        in_terms.push_back(samples[static_cast<std::size_t>(k)][coord]);
        out_terms.push_back(out[static_cast<std::size_t>(k)][coord]);
      }
      worst = std::max(worst, std::abs(pairwise_sum(in_terms) - pairwise_sum(out_terms)));
    }
  }
  return gate("conditioning.defining_equation", worst, 1e-12);
}

GateResult pullout_property() {
  const int count = 256;
  // Dyadic samples keep every product and mean exactly representable.
  std::vector<Vector> samples;
  samples.reserve(count);
  std::uint64_t ctr = 0;
  for (int k = 0; k < count; ++k) {
    std::vector<double> c(3);
    for (auto& x : c) {
      x = static_cast<double>(static_cast<int>(rng::mix64(kSampleStream + 7 * ++ctr) >> 54) - 512) / 1024.0;
    }
    samples.emplace_back(std::move(c));
  }
  const auto keys = synthetic_scalars(count, kSampleStream, 200000);
  const Partition part = Partition::rank_bins(keys, 8);
  std::vector<double> phi(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    phi[static_cast<std::size_t>(k)] = static_cast<double>(part.cell(k)) / 4.0 - 1.0;
  }
  const auto [lhs, rhs] = pullout(samples, phi, part);
  double worst = 0.0;
  for (std::size_t k = 0; k < lhs.size(); ++k) {
    worst = std::max(worst, max_abs_diff(lhs[k], rhs[k]));
  }
  return gate("conditioning.pullout", worst, 1e-12);
}

GateResult tower_property() {
  const int count = 512;
  const auto samples = synthetic_samples(count, 3, kSampleStream + 1);
  const auto keys = synthetic_scalars(count, kSampleStream, 300000);
  const Partition fine = Partition::rank_bins(keys, 8);
  const Partition coarse = Partition::rank_bins(keys, 2);  // unions of fine cells
  const auto fine_then_coarse = cond_exp_partition(cond_exp_partition(samples, fine), coarse);
  const auto direct = cond_exp_partition(samples, coarse);
  double worst = 0.0;
  for (std::size_t k = 0; k < direct.size(); ++k) {
    worst = std::max(worst, max_abs_diff(fine_then_coarse[k], direct[k]));
  }
  return gate("conditioning.tower", worst, 1e-12);
}

double normal_pdf(double x, double mean, double variance) {
  const double dev = x - mean;
  return std::exp(-dev * dev / (2.0 * variance)) / std::sqrt(2.0 * std::numbers::pi * variance);
}

GateResult bridge_pointwise() {
  const double params[][3] = {{0.25, 1.0, -1.3}, {0.5, 1.0, 0.0}, {0.9, 1.0, 2.5}, {0.3, 2.0, 0.7}};
  double worst = 0.0;
  for (const auto& p : params) {
    const BridgeKernel k(p[0], p[1]);
    const double mean = p[0] / p[1] * p[2];
    const double variance = p[0] * (p[1] - p[0]) / p[1];
    const double sd = std::sqrt(variance);
    for (int i = 0; i <= 120; ++i) {
      const double x = mean + (-6.0 + 0.1 * i) * sd;
      worst = std::max(worst, std::abs(bridge_density(k, x, p[2]) - normal_pdf(x, mean, variance)));
    }
  }
  return gate("conditioning.bridge_pointwise_normal", worst, 1e-12);
}

GateResult bridge_normalization() {
  const double params[][3] = {{0.25, 1.0, -1.3}, {0.5, 1.0, 0.0}, {0.9, 1.0, 2.5}, {0.3, 2.0, 0.7}};
  double worst = 0.0;
  for (const auto& p : params) {
    const BridgeKernel k(p[0], p[1]);
    const double mean = p[0] / p[1] * p[2];
    const double sd = std::sqrt(p[0] * (p[1] - p[0]) / p[1]);
    const double lo = mean - 8.0 * sd;
    const double hi = mean + 8.0 * sd;
    const int n = 4000;
    const double h = (hi - lo) / n;
    double acc = 0.5 * (bridge_density(k, lo, p[2]) + bridge_density(k, hi, p[2]));
    for (int i = 1; i < n; ++i) acc += bridge_density(k, lo + h * i, p[2]);
    worst = std::max(worst, std::abs(acc * h - 1.0));
  }
  return gate("conditioning.bridge_normalization", worst, 1e-6);
}

}  // namespace

std::vector<GateResult> run_exact_algebra_suite() {
  return {
      vecspace_round_trip(),
      vecspace_family_independence(),
      vecspace_linearity(),
      product_measure_identity(),
      partition_defining_equation(),
      pullout_property(),
      tower_property(),
      bridge_pointwise(),
      bridge_normalization(),
  };
}

}  // namespace pettis
