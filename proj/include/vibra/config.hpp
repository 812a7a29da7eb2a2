#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "vibra/linalg.hpp"

namespace CLI {
class App;
}

namespace vibra {

inline constexpr const char* kWorkersEnv = "VIBRA_WORKERS";

/// VIBRA_WORKERS if set to a positive integer, else the OpenMP default.
int default_workers();

struct RunConfig {
  std::string command;

  std::size_t n = 128;
  std::uint64_t samples = 100;
  std::string field = "complex";  // real | complex
  double m0 = 1.0;
  double sigma_m = 1.0;
  double sigma_k = 1.0;
  std::uint64_t seed = 20240611;
  std::size_t bins = 0;  // 0 picks ceil(sqrt(events)) capped at 4096
  int workers = 1;
  std::filesystem::path out_dir = "vibra_out";
  bool vectors = true;
  std::string target = "pencil";  // pencil | stiffness
  bool quiet = false;

  std::string pendulum = "uniform";  // uniform | disordered | file
  double calq = 0.0;
  double g = 1.0;
  std::filesystem::path params_file;
  double r1 = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> mu_list{1e-4, 0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0};
  std::size_t points = 1000;

  double r_pilot = 0.0;  // 0 takes the large-N edge scale
  std::size_t edge_bins = 320;
  double max_gof = 0.2;

  double beta_min = 1e-3;
  double beta_max = 1e2;
  std::size_t beta_points = 51;
  bool empirical = false;

  /// parse_field(field); throws Validation for anything else.
  Field field_kind() const { return parse_field(field); }
};

/// Every problem found, one per entry; empty when the config is usable.
std::vector<std::string> check(const RunConfig& cfg);

/// Throws a single Validation error listing every problem.
void validate(const RunConfig& cfg);

/// Binds every RunConfig field to a long option and a --config file option.
/// Config files are flat `key = value` lines; explicit flags win over the file.
void bind_options(CLI::App& app, RunConfig& cfg);

nlohmann::json to_json(const RunConfig& cfg);

}  // namespace vibra
