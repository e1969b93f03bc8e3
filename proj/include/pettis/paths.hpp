#pragma once

#include <charconv>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "pettis/vecspace.hpp"

namespace pettis {

namespace detail {
// Shortest-of-17-significant-digits text, byte-equivalent to printf "%.17g".
inline std::size_t format_g17(char* out, double v) {
  const auto res = std::to_chars(out, out + 32, v, std::chars_format::general, 17);
  return static_cast<std::size_t>(res.ptr - out);
}
}  // namespace detail

// Uniform grid 0 = t_0 < t_1 < ... < t_n = T with dt = T/n.
class TimeGrid {
 public:
  TimeGrid(double horizon, int steps);

  // Restriction of `grid` to its first `node` steps; `node` may be 0, which
  // yields the degenerate single-node grid used by path prefixes.
  static TimeGrid first_nodes(const TimeGrid& grid, int node);

  double horizon() const { return horizon_; }
  int steps() const { return steps_; }
  double dt() const { return dt_; }
  int num_nodes() const { return steps_ + 1; }
  double node(int i) const;
  // Index of the grid node at time t; UsageError when t is off-grid.
  int node_index(double t) const;

  bool operator==(const TimeGrid& other) const {
    return horizon_ == other.horizon_ && steps_ == other.steps_;
  }

 private:
  TimeGrid() = default;
  double horizon_ = 0.0;
  int steps_ = 0;
  double dt_ = 0.0;
};

struct ScalarPath {
  TimeGrid grid;
  std::vector<double> values;  // one per node

  ScalarPath(TimeGrid g, std::vector<double> v);
  double at_time(double t) const { return values[static_cast<std::size_t>(grid.node_index(t))]; }
};

struct VecPath {
  TimeGrid grid;
  std::vector<Vector> values;  // one per node

  VecPath(TimeGrid g, std::vector<Vector> v);
  const Vector& at_time(double t) const {
    return values[static_cast<std::size_t>(grid.node_index(t))];
  }
};

// Ensemble of scalar paths in one flat buffer. Path k is a pure function of
// (master_seed, k), so contents are bit-identical for equal
// (master_seed, grid, count) regardless of how generation is scheduled.
class PathEnsemble {
 public:
  PathEnsemble(TimeGrid grid, std::uint64_t master_seed, int count, std::vector<double> flat);

  const TimeGrid& grid() const { return grid_; }
  std::uint64_t master_seed() const { return master_seed_; }
  int count() const { return count_; }

  std::span<const double> values(int k) const;
  ScalarPath path(int k) const;

 private:
  TimeGrid grid_;
  std::uint64_t master_seed_ = 0;
  int count_ = 0;
  std::vector<double> flat_;
};

// Brownian ensemble: w_0 = 0, increments independent Normal(0, dt) drawn from
// the per-path counter-based stream.
PathEnsemble sample_brownian(const TimeGrid& grid, std::uint64_t master_seed, int count);

// Restriction of the path to [0, s]; the computational stand-in for the
// information available at time s. s must be a grid node.
ScalarPath prefix(const ScalarPath& path, double s);

// CSV dump with header path_id,t,w; one row per node, 17 significant digits.
void write_paths_csv(std::ostream& os, const PathEnsemble& ensemble);

}  // namespace pettis
