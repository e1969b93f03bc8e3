#include "pettis/paths.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstring>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include "pettis/rng.hpp"

namespace pettis {

namespace rng {

double standard_normal(std::uint64_t stream, std::uint64_t counter) {
  static const boost::math::normal_distribution<double> unit_normal(0.0, 1.0);
  return boost::math::quantile(unit_normal, uniform01(stream, counter));
}

}  // namespace rng

TimeGrid::TimeGrid(double horizon, int steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw UsageError("grid horizon must be positive and finite");
  }
  if (steps < 1) throw UsageError("grid steps must be >= 1");
  horizon_ = horizon;
  steps_ = steps;
  dt_ = horizon / static_cast<double>(steps);
}

TimeGrid TimeGrid::first_nodes(const TimeGrid& grid, int node) {
  if (node < 0 || node > grid.steps_) throw UsageError("prefix node out of range");
  TimeGrid g;
  g.steps_ = node;
  g.horizon_ = grid.node(node);
  g.dt_ = grid.dt_;
  return g;
}

double TimeGrid::node(int i) const {
  if (i < 0 || i > steps_) throw UsageError("node index out of range");
  if (i == steps_) return horizon_;
  return static_cast<double>(i) * dt_;
}

int TimeGrid::node_index(double t) const {
  const double tol = 1e-9 * std::max(1.0, horizon_);
  const double pos = t / dt_;
  const int i = static_cast<int>(std::lround(pos));
  if (i < 0 || i > steps_ || std::abs(t - node(i)) > tol) {
    std::ostringstream os;
    os << "time " << t << " is not a grid node";
    throw UsageError(os.str());
  }
  return i;
}

ScalarPath::ScalarPath(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (static_cast<int>(values.size()) != grid.num_nodes()) {
    throw UsageError("scalar path length does not match grid");
  }
  for (double x : values) {
    if (!std::isfinite(x)) throw NumericError("scalar path has non-finite values");
  }
}

VecPath::VecPath(TimeGrid g, std::vector<Vector> v) : grid(g), values(std::move(v)) {
  if (static_cast<int>(values.size()) != grid.num_nodes()) {
    throw UsageError("vector path length does not match grid");
  }
  const int d = values.empty() ? 0 : values.front().dim();
  for (const auto& x : values) {
    if (x.dim() != d) throw UsageError("vector path has inconsistent dimensions");
    if (!x.finite()) throw NumericError("vector path has non-finite values");
  }
}

PathEnsemble::PathEnsemble(TimeGrid grid, std::uint64_t master_seed, int count,
                           std::vector<double> flat)
    : grid_(grid), master_seed_(master_seed), count_(count), flat_(std::move(flat)) {
  if (count < 1) throw UsageError("ensemble count must be >= 1");
  if (flat_.size() != static_cast<std::size_t>(count) * static_cast<std::size_t>(grid.num_nodes())) {
    throw UsageError("ensemble buffer size mismatch");
  }
}

std::span<const double> PathEnsemble::values(int k) const {
  if (k < 0 || k >= count_) throw UsageError("path index out of range");
  const std::size_t nodes = static_cast<std::size_t>(grid_.num_nodes());
  return std::span<const double>(flat_.data() + static_cast<std::size_t>(k) * nodes, nodes);
}

ScalarPath PathEnsemble::path(int k) const {
  const auto v = values(k);
  return ScalarPath(grid_, std::vector<double>(v.begin(), v.end()));
}

PathEnsemble sample_brownian(const TimeGrid& grid, std::uint64_t master_seed, int count) {
  if (count < 1) throw UsageError("ensemble count must be >= 1");
  const int nodes = grid.num_nodes();
  const double sqrt_dt = std::sqrt(grid.dt());
  std::vector<double> flat(static_cast<std::size_t>(count) * static_cast<std::size_t>(nodes));
  for (int k = 0; k < count; ++k) {
    const std::uint64_t stream = rng::derive_stream(master_seed, static_cast<std::uint64_t>(k));
    double* w = flat.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(nodes);
    w[0] = 0.0;
    for (int i = 0; i < grid.steps(); ++i) {
      w[i + 1] = w[i] + sqrt_dt * rng::standard_normal(stream, static_cast<std::uint64_t>(i));
    }
  }
  return PathEnsemble(grid, master_seed, count, std::move(flat));
}

ScalarPath prefix(const ScalarPath& path, double s) {
  const int i = path.grid.node_index(s);
  const TimeGrid g = TimeGrid::first_nodes(path.grid, i);
  return ScalarPath(g, std::vector<double>(path.values.begin(), path.values.begin() + i + 1));
}

void write_paths_csv(std::ostream& os, const PathEnsemble& ensemble) {
  os << "path_id,t,w\n";
  const auto& grid = ensemble.grid();
  // The node times repeat across every path; format them once.
  std::vector<std::string> t_text(static_cast<std::size_t>(grid.num_nodes()));
  char scratch[40];
  for (int i = 0; i < grid.num_nodes(); ++i) {
    t_text[static_cast<std::size_t>(i)].assign(scratch, detail::format_g17(scratch, grid.node(i)));
  }
  std::string buffer;
  buffer.reserve(1 << 20);
  char row[96];
  for (int k = 0; k < ensemble.count(); ++k) {
    const auto w = ensemble.values(k);
    char id[16];
    const auto id_res = std::to_chars(id, id + sizeof(id), k);
    const std::size_t id_len = static_cast<std::size_t>(id_res.ptr - id);
    for (int i = 0; i < grid.num_nodes(); ++i) {
      char* p = row;
      std::memcpy(p, id, id_len);
      p += id_len;
      *p++ = ',';
      const auto& t = t_text[static_cast<std::size_t>(i)];
      std::memcpy(p, t.data(), t.size());
      p += t.size();
      *p++ = ',';
      p += detail::format_g17(p, w[static_cast<std::size_t>(i)]);
      *p++ = '\n';
      buffer.append(row, static_cast<std::size_t>(p - row));
      if (buffer.size() > (1 << 20) - 128) {
        os.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        buffer.clear();
      }
    }
  }
  os.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
}

}  // namespace pettis
