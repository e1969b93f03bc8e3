#include "pettis/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstring>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "pettis/conditioning.hpp"
#include "pettis/report_json.hpp"
#include "pettis/validate.hpp"

namespace pettis {

namespace {

using Json = nlohmann::ordered_json;

void require_keys(const Json& obj, const std::string& section,
                  std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw UsageError("config section '" + section + "' must be an object");
  }
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) throw UsageError("unknown config key '" + section + "." + item.key() + "'");
  }
  for (const char* k : allowed) {
    if (!obj.contains(k)) throw UsageError("missing config key '" + section + "." + k + "'");
  }
}

double as_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw UsageError("config value '" + where + "' must be a number");
  return j.get<double>();
}

int as_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw UsageError("config value '" + where + "' must be an integer");
  const long long v = j.get<long long>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw UsageError("config value '" + where + "' is out of range");
  }
  return static_cast<int>(v);
}

std::vector<double> as_coeffs(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw UsageError("config value '" + where + "' must be a nonempty coefficient array");
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_number(j[i], where));
  }
  return out;
}

std::vector<std::vector<double>> as_coeff_table(const Json& j, const std::string& where, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    std::ostringstream os;
    os << "config value '" << where << "' must be an array of " << dim << " coefficient lists";
    throw UsageError(os.str());
  }
  std::vector<std::vector<double>> out;
  out.reserve(j.size());
  for (std::size_t c = 0; c < j.size(); ++c) {
    std::ostringstream os;
    os << where << "[" << c << "]";
    out.push_back(as_coeffs(j[c], os.str()));
  }
  return out;
}

Json config_json(const ExperimentConfig& c) {
  Json j;
  j["space"] = {{"dim", c.dim}, {"norm", to_string(c.norm)}};
  j["grid"] = {{"T", c.horizon}, {"steps", c.steps}};
  j["mc"] = {{"paths", c.path_count}, {"seed", c.seed}};
  j["process"] = {{"psi", c.psi_coeffs}, {"phi", c.phi_coeffs}};
  switch (c.r_mode) {
    case ExperimentConfig::RMode::Auto:
      j["girsanov"] = {{"r", "auto"}};
      break;
    case ExperimentConfig::RMode::Constant:
      j["girsanov"] = {{"r", c.r_constant}};
      break;
    case ExperimentConfig::RMode::Polynomial:
      j["girsanov"] = {{"r", c.r_coeffs}};
      break;
  }
  j["bridge"] = {{"s", c.bridge_s}, {"t", c.bridge_t}};
  j["output"] = {{"dir", c.resolved_output_dir().string()}};
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  require_keys(doc, "config", {"space", "grid", "mc", "process", "girsanov", "bridge", "output"});
  require_keys(doc["space"], "space", {"dim", "norm"});
  require_keys(doc["grid"], "grid", {"T", "steps"});
  require_keys(doc["mc"], "mc", {"paths", "seed"});
  require_keys(doc["process"], "process", {"psi", "phi"});
  require_keys(doc["girsanov"], "girsanov", {"r"});
  require_keys(doc["bridge"], "bridge", {"s", "t"});
  require_keys(doc["output"], "output", {"dir"});

  ExperimentConfig c;
  c.dim = as_int(doc["space"]["dim"], "space.dim");
  if (c.dim < 1) throw UsageError("space.dim must be >= 1");
  if (!doc["space"]["norm"].is_string()) throw UsageError("space.norm must be a string");
  c.norm = norm_tag_from_string(doc["space"]["norm"].get<std::string>());

  c.horizon = as_number(doc["grid"]["T"], "grid.T");
  c.steps = as_int(doc["grid"]["steps"], "grid.steps");
  if (!(c.horizon > 0.0)) throw UsageError("grid.T must be > 0");
  if (c.steps < 1) throw UsageError("grid.steps must be >= 1");

  c.path_count = as_int(doc["mc"]["paths"], "mc.paths");
  if (c.path_count < 1) throw UsageError("mc.paths must be >= 1");
  const Json& seed = doc["mc"]["seed"];
  if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() &&
                                    seed.get<long long>() < 0)) {
    throw UsageError("mc.seed must be a nonnegative integer");
  }
  c.seed = seed.get<std::uint64_t>();

  c.psi_coeffs = as_coeff_table(doc["process"]["psi"], "process.psi", c.dim);
  c.phi_coeffs = as_coeff_table(doc["process"]["phi"], "process.phi", c.dim);

  const Json& r = doc["girsanov"]["r"];
  if (r.is_string()) {
    if (r.get<std::string>() != "auto") {
      throw UsageError("girsanov.r must be \"auto\", a number, or a coefficient array");
    }
    c.r_mode = RMode::Auto;
  } else if (r.is_number()) {
    c.r_mode = RMode::Constant;
    c.r_constant = r.get<double>();
  } else if (r.is_array()) {
    c.r_mode = RMode::Polynomial;
    c.r_coeffs = as_coeffs(r, "girsanov.r");
  } else {
    throw UsageError("girsanov.r must be \"auto\", a number, or a coefficient array");
  }

  c.bridge_s = as_number(doc["bridge"]["s"], "bridge.s");
  c.bridge_t = as_number(doc["bridge"]["t"], "bridge.t");
  if (!(c.bridge_s >= 0.0) || !(c.bridge_s < c.bridge_t) || !(c.bridge_t <= c.horizon)) {
    throw UsageError("bridge times must satisfy 0 <= s < t <= T");
  }

  if (!doc["output"]["dir"].is_string()) throw UsageError("output.dir must be a string");
  c.output_dir = doc["output"]["dir"].get<std::string>();

  // Bridge times must land on grid nodes.
  c.grid().node_index(c.bridge_s);
  c.grid().node_index(c.bridge_t);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot open config file: " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

TimeGrid ExperimentConfig::grid() const { return TimeGrid(horizon, steps); }

NormedSpace ExperimentConfig::space() const { return NormedSpace(dim, norm); }

PolyVectorField ExperimentConfig::psi() const {
  std::vector<Polynomial> coords;
  coords.reserve(psi_coeffs.size());
  for (const auto& c : psi_coeffs) coords.emplace_back(c);
  return PolyVectorField(std::move(coords));
}

PolyVectorField ExperimentConfig::phi() const {
  std::vector<Polynomial> coords;
  coords.reserve(phi_coeffs.size());
  for (const auto& c : phi_coeffs) coords.emplace_back(c);
  return PolyVectorField(std::move(coords));
}

DualFamily ExperimentConfig::family() const { return DualFamily::triangular_ones(dim); }

GirsanovSetup ExperimentConfig::girsanov_setup() const {
  const TimeGrid g = grid();
  VectorField psi_field = psi().field();
  VectorField phi_field = phi().field();
  switch (r_mode) {
    case RMode::Auto:
      return GirsanovSetup::make_auto(g, std::move(psi_field), std::move(phi_field));
    case RMode::Constant:
      return GirsanovSetup::make(g, std::move(psi_field), std::move(phi_field),
                                 ScalarField::constant(r_constant));
    case RMode::Polynomial:
      return GirsanovSetup::make(g, std::move(psi_field), std::move(phi_field),
                                 Polynomial(r_coeffs).field());
  }
  throw UsageError("invalid girsanov.r mode");
}

std::filesystem::path ExperimentConfig::resolved_output_dir() const {
  if (const char* env = std::getenv(kOutputDirEnvVar); env != nullptr && env[0] != '\0') {
    return std::filesystem::path(env);
  }
  return output_dir;
}

namespace {

// Uniform exit-code policy: precondition and config problems are usage
// errors, statistical verdicts drive 0 vs 1.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NoValidRError& e) {
    std::cerr << "no-valid-r: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

std::ofstream open_output(const std::filesystem::path& dir, const char* filename) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output dir " + dir.string() + ": " + ec.message());
  const auto file = dir / filename;
  std::ofstream out(file, std::ios::binary);
  if (!out) throw UsageError("cannot write " + file.string());
  return out;
}

void write_json(const ExperimentConfig& config, const char* filename, Json body) {
  Json doc;
  doc["seed"] = config.seed;
  doc["config"] = config_json(config);
  doc.update(body);
  std::ofstream out = open_output(config.resolved_output_dir(), filename);
  out << doc.dump(2) << "\n";
  if (!out) throw UsageError(std::string("write failed for ") + filename);
}

}  // namespace

int cmd_simulate(const ExperimentConfig& config) {
  return guarded([&] {
    const TimeGrid grid = config.grid();
    const PathEnsemble ensemble = sample_brownian(grid, config.seed, config.path_count);

    {
      std::ofstream out = open_output(config.resolved_output_dir(), "paths.csv");
      write_paths_csv(out, ensemble);
      if (!out) throw UsageError("write failed for paths.csv");
    }
    {
      std::ofstream out = open_output(config.resolved_output_dir(), "process.csv");
      out << "path_id,t";
      for (int c = 0; c < config.dim; ++c) out << ",coord_" << c;
      out << "\n";
      const DualFamily family = config.family();
      const VectorField psi_field = config.psi().field();
      const VectorField phi_field = config.phi().field();

      // Per-node pairing tables; the fields depend on t only, so evaluating
      // them once per node and running the Ito recursion inline keeps the
      // dump at the path-generation cost.
      const std::size_t n = static_cast<std::size_t>(grid.steps());
      const std::size_t m = static_cast<std::size_t>(family.size());
      const std::size_t d = static_cast<std::size_t>(config.dim);
      std::vector<double> psi_pair(m * n), phi_pair(m * n);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = grid.node(static_cast<int>(i));
        const Vector psi_v = psi_field(t);
        const Vector phi_v = phi_field(t);
        for (std::size_t j = 0; j < m; ++j) {
          psi_pair[j * n + i] = apply(family.member(static_cast<int>(j)), psi_v);
          phi_pair[j * n + i] = apply(family.member(static_cast<int>(j)), phi_v);
        }
      }
      const std::vector<double>& pinv = family.pseudo_inverse();
      const double dt = grid.dt();

      std::vector<std::string> t_text(static_cast<std::size_t>(grid.num_nodes()));
      {
        char scratch[40];
        for (int i = 0; i < grid.num_nodes(); ++i) {
          t_text[static_cast<std::size_t>(i)].assign(scratch,
                                                     detail::format_g17(scratch, grid.node(i)));
        }
      }
      std::string buffer;
      buffer.reserve(1 << 20);
      std::vector<double> sums(m), coords(d), row_scratch(m);
      std::vector<char> row(48 * (d + 2));
      for (int k = 0; k < ensemble.count(); ++k) {
        const auto w = ensemble.values(k);
        std::fill(sums.begin(), sums.end(), 0.0);
        char id[16];
        const auto id_res = std::to_chars(id, id + sizeof(id), k);
        const std::size_t id_len = static_cast<std::size_t>(id_res.ptr - id);
        for (std::size_t i = 0; i <= n; ++i) {
          if (i > 0) {
            const double dw = w[i] - w[i - 1];
            for (std::size_t j = 0; j < m; ++j) {
              sums[j] += psi_pair[j * n + (i - 1)] * dt + phi_pair[j * n + (i - 1)] * dw;
            }
          }
          double weak = 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            const double* prow = pinv.data() + c * m;
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) acc += prow[j] * sums[j];
            coords[c] = acc;
          }
          for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
              acc += family.member(static_cast<int>(j)).coeffs[c] * coords[c];
            }
            weak = std::max(weak, std::abs(acc - sums[j]));
          }
          if (weak > kWeakConsistencyTol) {
            throw PettisPropertyError("process reconstruction violates weak consistency");
          }
          char* p = row.data();
          std::memcpy(p, id, id_len);
          p += id_len;
          *p++ = ',';
          const auto& t = t_text[i];
          std::memcpy(p, t.data(), t.size());
          p += t.size();
          for (std::size_t c = 0; c < d; ++c) {
            *p++ = ',';
            p += detail::format_g17(p, coords[c]);
          }
          *p++ = '\n';
          buffer.append(row.data(), static_cast<std::size_t>(p - row.data()));
          if (buffer.size() > (1 << 20) - row.size()) {
            out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
            buffer.clear();
          }
        }
      }
      out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
      if (!out) throw UsageError("write failed for process.csv");
    }
    return kExitPass;
  });
}

int cmd_girsanov(const ExperimentConfig& config) {
  return guarded([&] {
    const GirsanovSetup setup = config.girsanov_setup();
    const PathEnsemble ensemble = sample_brownian(config.grid(), config.seed, config.path_count);
    const GirsanovReport report =
        girsanov_certify(setup, ensemble, config.family(), config.space());
    write_json(config, "girsanov_report.json", to_json(report));
    return report.pass ? kExitPass : kExitStatFail;
  });
}

int cmd_bridge(const ExperimentConfig& config) {
  return guarded([&] {
    const PathEnsemble ensemble = sample_brownian(config.grid(), config.seed, config.path_count);
    const double s = config.bridge_s;
    const double t = config.bridge_t;
    const double T = config.horizon;

    const BridgeRegressionReport bridge = bridge_regression(ensemble, t);
    const ConditionalRegressionReport n_check = n_martingale_check(s, t, ensemble);

    bool pass = bridge.slope_test.pass && bridge.cond_var_test.pass && n_check.verdict &&
                !n_check.inconclusive;

    Json sweep = Json::array();
    for (double alpha : {t / T, 1.0, T / t}) {
      const ConditionalRegressionReport row = q_kernel_cond(alpha, s, t, ensemble);
      const bool martingale_expected = std::abs(alpha - T / t) <= 1e-12;
      bool row_ok;
      if (row.inconclusive) {
        row_ok = false;
      } else if (martingale_expected) {
        row_ok = row.verdict;
      } else {
        // The martingale claim must fail at this scale, with the slope landing
        // on the Gaussian-kernel prediction.
        row_ok = !row.martingale &&
                 std::abs(row.reg.slope - row.target_slope) <= kDefaultZGate * row.reg.slope_se;
      }
      pass = pass && row_ok;
      Json row_json = to_json(row);
      row_json["martingale_expected"] = martingale_expected;
      row_json["consistent_with_theory"] = row_ok;
      sweep.push_back(std::move(row_json));
    }

    Json body;
    body["bridge"] = to_json(bridge);
    body["n_check"] = to_json(n_check);
    body["q_sweep"] = std::move(sweep);
    body["pass"] = pass;
    write_json(config, "bridge_report.json", std::move(body));
    return pass ? kExitPass : kExitStatFail;
  });
}

int cmd_validate(const ExperimentConfig& config) {
  return guarded([&] {
    (void)config;  // the suite is deterministic and self-contained
    const auto gates = run_exact_algebra_suite();
    bool all = true;
    for (const auto& g : gates) {
      std::printf("[%s] %-45s residual=%.3e gate=%.0e\n", g.pass ? "PASS" : "FAIL",
                  g.name.c_str(), g.residual, g.gate);
      all = all && g.pass;
    }
    return all ? kExitPass : kExitStatFail;
  });
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Monte Carlo engine for weak-integral stochastic calculus"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* sim = app.add_subcommand("simulate", "Write path and process CSV dumps");
  CLI::App* gir = app.add_subcommand("girsanov", "Run the drift-removal certification");
  CLI::App* bri = app.add_subcommand("bridge", "Run the conditional-measure regressions");
  CLI::App* val = app.add_subcommand("validate", "Run the exact algebra suite (no Monte Carlo)");
  for (CLI::App* sub : {sim, gir, bri, val}) {
    sub->add_option("--config", config_path, "Path to the experiment config (JSON)")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  ExperimentConfig config;
  try {
    config = ExperimentConfig::load(config_path);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  if (sim->parsed()) return cmd_simulate(config);
  if (gir->parsed()) return cmd_girsanov(config);
  if (bri->parsed()) return cmd_bridge(config);
  if (val->parsed()) return cmd_validate(config);
  return kExitUsage;
}

}  // namespace pettis
