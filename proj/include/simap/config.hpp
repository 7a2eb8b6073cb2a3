#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "simap/experiments.hpp"

namespace simap {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Layered run configuration: documented defaults, overridden by a key=value
// file, overridden by flags. The fully resolved form is persisted next to
// every output.
struct RunConfig {
  std::string model = "toy";
  int experiment = 1;
  std::uint64_t seed = 1;
  double scale = 1.0;
  std::string out_dir;  // empty = $SIMAP_OUT_DIR or "."
  int threads = 0;      // 0 = hardware concurrency

  // optimizer
  int anneal_budget_factor = 3000;
  double anneal_cooling = 0.95;
  int anneal_evals_per_temp = 20;
  double anneal_step_fraction = 0.1;
  int anneal_probes = 50;
  int polish_max_iters = 500;
  double polish_init_fraction = 0.01;
  int polish_lm_iters = 60;
  double map_rel_tol = 1e-6;
  double map_abs_tol = 1e-8;

  // svm
  std::string svm_c_values = "0.01,0.1,1,10,100,1000";
  std::string svm_scale_factors = "0.1,0.3,1,3,10,30";
  int svm_folds = 10;
  double svm_kkt_tol = 1e-3;
  long svm_max_iters = 10000;

  // input constants for the compartmental family
  double input_s0 = 100.0;
  double input_k_abs = 0.05;

  int exp2_train_per_class = 10;
  std::string train_sizes;  // csv override, empty = default ladder
};

// throws ConfigError on unknown keys or malformed values
void apply_config_kv(RunConfig& cfg, const std::string& key,
                     const std::string& value);
RunConfig load_config_file(const std::filesystem::path& path,
                           RunConfig base = RunConfig());
std::string render_config(const RunConfig& cfg);  // sorted key=value lines

std::string resolve_out_dir(const RunConfig& cfg);

OptimizerConfig optimizer_from(const RunConfig& cfg);
HyperGrid hyper_grid_from(const RunConfig& cfg);
SmoConfig smo_from(const RunConfig& cfg);
InputConstants input_from(const RunConfig& cfg);
HarnessConfig harness_from(const RunConfig& cfg);

std::vector<double> parse_csv_doubles(const std::string& csv);
std::vector<int> parse_csv_ints(const std::string& csv);

}  // namespace simap
