#include "vibra/config.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "vibra/error.hpp"
#include "vibra/freeprob.hpp"

namespace vibra {

int default_workers() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 4096) return static_cast<int>(v);
  }
  return std::max(1, omp_get_max_threads());
}

std::vector<std::string> check(const RunConfig& c) {
  std::vector<std::string> p;
  const std::string& cmd = c.command;
  const bool sampling = cmd == "sample" || cmd == "edge" || (cmd == "pendulum" && c.pendulum == "disordered") ||
                        (cmd == "thermo" && c.empirical);
  if (cmd != "sample" && cmd != "pendulum" && cmd != "analytic" && cmd != "edge" && cmd != "thermo" &&
      cmd != "selftest") {
    p.push_back("unknown command '" + cmd + "'");
  }
  if (c.n < 1) p.push_back("n must be >= 1");
  if (c.field != "real" && c.field != "complex") p.push_back("field must be 'real' or 'complex'");
  if (sampling && c.samples == 0) p.push_back("samples must be >= 1");
  if (!(c.m0 > 0.0)) p.push_back("m0 must be > 0");
  if (!(c.sigma_m > 0.0)) p.push_back("sigma_m must be > 0");
  if (!(c.sigma_k > 0.0)) p.push_back("sigma_k must be > 0");
  if (c.sigma_m > 0.0 && c.m0 > 0.0 && c.m0 / (c.sigma_m * c.sigma_m) < kMinMu) p.push_back("m0 / sigma_m^2 must be >= 1e-8");
  if (c.bins > 4096) p.push_back("bins must be <= 4096");
  if (c.workers < 1) p.push_back("workers must be >= 1");
  if (c.target != "pencil" && c.target != "stiffness") p.push_back("target must be 'pencil' or 'stiffness'");
  if (c.pendulum != "uniform" && c.pendulum != "disordered" && c.pendulum != "file") {
    p.push_back("pendulum must be 'uniform', 'disordered' or 'file'");
  }
  if (cmd == "pendulum") {
    if (c.pendulum == "file" && c.params_file.empty()) p.push_back("pendulum=file needs params_file");
    if (c.pendulum == "disordered" && c.n < 2) p.push_back("disordered pendulum needs n >= 2");
    if (c.pendulum == "disordered" && !c.vectors && std::isnan(c.r1)) p.push_back("disordered pendulum needs vectors or explicit r1/r2");
    if (c.pendulum == "uniform" && c.calq > 0.0 && c.n < 2) p.push_back("charged pendulum needs n >= 2");
  }
  if (!(c.calq >= 0.0)) p.push_back("calq must be >= 0");
  if (!(c.g >= 0.0)) p.push_back("g must be >= 0");
  if (!std::isnan(c.r1) || !std::isnan(c.r2)) {
    if (std::isnan(c.r1) || std::isnan(c.r2) || !(c.r1 < c.r2)) p.push_back("region cuts need r1 < r2, both set");
  }
  if (c.mu_list.empty()) p.push_back("mu_list must not be empty");
  for (double mu : c.mu_list) {
    if (!(mu >= kMinMu)) p.push_back("mu_list entries must be >= 1e-8");
  }
  if (c.points < 2) p.push_back("points must be >= 2");
  if (c.r_pilot < 0.0) p.push_back("r_pilot must be >= 0");
  if (c.edge_bins < 8) p.push_back("edge_bins must be >= 8");
  if (!(c.max_gof > 0.0)) p.push_back("max_gof must be > 0");
  if (!(c.beta_min > 0.0) || !(c.beta_max >= c.beta_min)) p.push_back("beta range needs 0 < beta_min <= beta_max");
  if (c.beta_points < 1) p.push_back("beta_points must be >= 1");
  return p;
}

void validate(const RunConfig& cfg) {
  const auto problems = check(cfg);
  if (problems.empty()) return;
  std::ostringstream os;
  os << "invalid configuration (" << problems.size() << " problem" << (problems.size() > 1 ? "s" : "") << "): ";
  for (std::size_t i = 0; i < problems.size(); ++i) os << (i ? "; " : "") << problems[i];
  fail(ErrorKind::Validation, os.str());
}

void bind_options(CLI::App& app, RunConfig& c) {
  app.set_config("--config", "", "flat key = value file; explicit flags override it");
  app.add_option("command", c.command, "sample | pendulum | analytic | edge | thermo | selftest")->required();
  app.add_option("--n", c.n, "matrix dimension / segment count");
  app.add_option("--samples", c.samples, "Monte Carlo samples");
  app.add_option("--field", c.field, "real | complex");
  app.add_option("--m0", c.m0, "mass shift");
  app.add_option("--sigma_m", c.sigma_m, "mass scale");
  app.add_option("--sigma_k", c.sigma_k, "stiffness scale");
  app.add_option("--seed", c.seed, "master seed");
  app.add_option("--bins", c.bins, "density histogram bins (0: sqrt of events, max 4096)");
  app.add_option("--workers", c.workers, std::string("worker threads (default $") + kWorkersEnv + ")");
  app.add_option("--out", c.out_dir, "output directory");
  app.add_option("--vectors", c.vectors, "compute eigenvectors and participation ratios");
  app.add_option("--target", c.target, "pencil | stiffness (spectrum of K alone)");
  app.add_flag("--quiet", c.quiet, "no progress on stderr");
  app.add_option("--pendulum", c.pendulum, "uniform | disordered | file");
  app.add_option("--calq", c.calq, "charge scale");
  app.add_option("--g", c.g, "gravity");
  app.add_option("--params_file", c.params_file, "pendulum parameters (JSON)");
  app.add_option("--r1", c.r1, "low/mid region cut in omega/n (default: PR half maximum)");
  app.add_option("--r2", c.r2, "mid/high region cut in omega/n");
  app.add_option("--mu_list", c.mu_list, "mu values for analytic and thermo")->delimiter(',');
  app.add_option("--points", c.points, "analytic grid points");
  app.add_option("--r_pilot", c.r_pilot, "pilot edge scale (0: large-N value)");
  app.add_option("--edge_bins", c.edge_bins, "edge histogram bins");
  app.add_option("--max_gof", c.max_gof, "Airy fit acceptance threshold");
  app.add_option("--beta_min", c.beta_min, "smallest inverse temperature");
  app.add_option("--beta_max", c.beta_max, "largest inverse temperature");
  app.add_option("--beta_points", c.beta_points, "log-spaced beta grid size");
  app.add_option("--empirical", c.empirical, "also sample the pencil for an empirical thermo curve");
}

nlohmann::json to_json(const RunConfig& c) {
  auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  return {{"command", c.command},
          {"n", c.n},
          {"samples", c.samples},
          {"field", c.field},
          {"m0", c.m0},
          {"sigma_m", c.sigma_m},
          {"sigma_k", c.sigma_k},
          {"seed", c.seed},
          {"bins", c.bins},
          {"vectors", c.vectors},
          {"target", c.target},
          {"pendulum", c.pendulum},
          {"calq", c.calq},
          {"g", c.g},
          {"params_file", c.params_file.string()},
          {"r1", num(c.r1)},
          {"r2", num(c.r2)},
          {"mu_list", c.mu_list},
          {"points", c.points},
          {"r_pilot", c.r_pilot},
          {"edge_bins", c.edge_bins},
          {"max_gof", c.max_gof},
          {"beta_min", c.beta_min},
          {"beta_max", c.beta_max},
          {"beta_points", c.beta_points},
          {"empirical", c.empirical}};
}

}  // namespace vibra
