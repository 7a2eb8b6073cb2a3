#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "simap/dataset.hpp"
#include "simap/optimize.hpp"

namespace simap {

struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MapResult {
  Vector theta_map;
  Vector phi;  // recomputed from theta_map via the model's sim map
  double log_likelihood = 0.0;
  long evaluations = 0;
  bool converged = false;
};

struct OptimizerConfig {
  AnnealConfig anneal;
  NelderMeadConfig polish;
  LmConfig lm;  // least-squares refinement after the simplex polish
  double flat_objective_tol = 1e-9;
  // likelihood integration tolerances; fixed so the objective is deterministic
  double rel_tol = 1e-6;
  double abs_tol = 1e-8;
  // tighter integration inside the least-squares refinement, where the
  // finite-difference Jacobian needs a quieter objective
  double lm_rel_tol = 1e-10;
  double lm_abs_tol = 1e-12;
};

// Sum of Gaussian log densities of the residuals. Integration failure yields
// -inf, which the optimizers treat as a rejected point.
double log_likelihood(const Vector& theta, const LabeledSeries& series,
                      const NoiseSpec& noise, const ModelDefinition& model,
                      double rel_tol = 1e-6, double abs_tol = 1e-8);

// Noise-scaled residual stack; log_likelihood = const - 1/2 |r|^2. Empty on
// integration failure.
Vector scaled_residuals(const Vector& theta, const LabeledSeries& series,
                        const NoiseSpec& noise, const ModelDefinition& model,
                        double rel_tol = 1e-6, double abs_tol = 1e-8);

// Bounded simulated annealing over the ROI followed by a Nelder-Mead polish.
MapResult map_estimate(const LabeledSeries& series,
                       const ModelDefinition& model, const NoiseSpec& noise,
                       const OptimizerConfig& cfg, Rng& rng);

Vector apply_sim(const Vector& theta, const ModelDefinition& model);

enum class FeatureMode { kTheta, kPhi };

std::string to_string(FeatureMode mode);
FeatureMode feature_mode_from_string(const std::string& s);

struct FeatureMatrix {
  Matrix rows;  // one feature row per surviving series
  std::vector<int> labels;
  std::string model;
  FeatureMode mode = FeatureMode::kTheta;
  int dropped = 0;
  double mean_evaluations = 0.0;
};

// One MAP estimate per series, rng streams split per index; failed series
// yield converged=false entries recorded in `failures`.
std::vector<MapResult> map_dataset(const Dataset& ds,
                                   const ModelDefinition& model,
                                   const NoiseSpec& noise,
                                   const OptimizerConfig& cfg, const Rng& rng,
                                   int threads,
                                   std::vector<std::size_t>* failures = nullptr);

FeatureMatrix features_from_maps(const std::vector<MapResult>& maps,
                                 const std::vector<int>& labels,
                                 const std::vector<std::size_t>& failures,
                                 const std::string& model_name,
                                 FeatureMode mode);

FeatureMatrix dataset_to_features(const Dataset& ds,
                                  const ModelDefinition& model,
                                  const NoiseSpec& noise, FeatureMode mode,
                                  const OptimizerConfig& cfg, Rng& rng,
                                  int threads = 1);

void save_features(const std::filesystem::path& path, const FeatureMatrix& fm);
FeatureMatrix load_features(const std::filesystem::path& path);

}  // namespace simap
