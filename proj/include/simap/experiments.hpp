#pragma once

#include <optional>
#include <string>
#include <vector>

#include "simap/map_inference.hpp"
#include "simap/svm.hpp"

namespace simap {

struct TrialPlan {
  std::string model;
  std::string condition;  // FO | PO | PO+SIM
  GridKind grid = GridKind::kDense;
  double sigma = 0.0;
  std::vector<int> train_sizes;  // per-class counts
  int n_trials = 0;
  std::uint64_t seed = 0;
};

struct CurvePoint {
  double x = 0.0;  // train examples per class, or sigma for noise sweeps
  double mean_error = 0.0, std_error = 0.0;
  double mean_rel_sv = 0.0, std_rel_sv = 0.0;
  int trials_ok = 0;
  bool valid = false;
  bool degenerate_std = false;  // from a single successful trial
};

struct LearningCurve {
  std::string condition;
  GridKind grid = GridKind::kDense;
  double sigma = 0.0;
  std::vector<CurvePoint> points;
};

struct TrialRecord {
  std::string model, condition;
  GridKind grid = GridKind::kDense;
  double sigma = 0.0;
  int n_train = 0;
  int trial = 0;
  double error = 0.0, rel_sv = 0.0;
  bool ok = false;
};

struct NoiseSweepSummary {
  double sigma_star = 0.0;
  double delta_eps_star = 0.0;
  double mean_delta_eps = 0.0;
};

struct ExperimentResult {
  int experiment = 0;
  std::string model;
  std::uint64_t seed = 0;
  double scale = 1.0;
  std::vector<TrialRecord> raw;
  std::vector<LearningCurve> curves;
  std::optional<NoiseSweepSummary> summary;
};

struct HarnessConfig {
  double scale = 1.0;  // shrinks N_test, trial counts and the hyper grid
  std::uint64_t seed = 1;
  int threads = 1;
  OptimizerConfig optimizer;
  HyperGrid hyper = default_hyper_grid();
  SmoConfig smo;
  std::vector<int> train_sizes;  // empty = default ladder
  int exp2_train_per_class = 10;
};

std::vector<int> default_train_sizes(const ModelDefinition& model);
HyperGrid shrink_hyper_grid(const HyperGrid& grid, double scale);

// FO / PO / PO+SIM learning curves on the dense grid (FO skipped for toy).
ExperimentResult run_experiment1(const ModelDefinition& model,
                                 const HarnessConfig& cfg);
// PO vs PO+SIM error curves over the observation-noise sweep, plus summary.
ExperimentResult run_experiment2(const ModelDefinition& model,
                                 const HarnessConfig& cfg);
// PO vs PO+SIM learning curves per grid kind at fixed noise.
ExperimentResult run_experiment3(const ModelDefinition& model,
                                 const HarnessConfig& cfg);

CurvePoint aggregate(const std::vector<double>& errors,
                     const std::vector<double>& rel_svs, double x);

NoiseSweepSummary noise_sweep_summary(const LearningCurve& po,
                                      const LearningCurve& po_sim);

struct SiModelReport {
  std::string model;
  int pairs = 0;
  double max_output_dev = 0.0;
  double max_sim_dev = 0.0;
  double max_laplace_rel_dev = 0.0;  // cml only
  double output_tol = 0.0, sim_tol = 0.0, laplace_tol = 0.0;
  bool pass = false;
};

// Samples theta, builds gauge pairs and checks output / SIM equivalence
// numerically (plus the Laplace oracle for cml).
SiModelReport verify_si(const ModelDefinition& model, int n_pairs,
                        double output_tol, std::uint64_t seed);

// ---- results files ----------------------------------------------------------
std::string render_results(const ExperimentResult& res);
std::string render_aggregates(const ExperimentResult& res);
void save_results(const std::filesystem::path& path,
                  const ExperimentResult& res);
void save_aggregates(const std::filesystem::path& path,
                     const ExperimentResult& res);
// Reads a raw results file and rebuilds curves (and the exp-2 summary) from it.
ExperimentResult load_results(const std::filesystem::path& path);
void rebuild_curves(ExperimentResult& res);

}  // namespace simap
