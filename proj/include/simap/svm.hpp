#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "simap/ode.hpp"
#include "simap/rng.hpp"

namespace simap {

struct Standardizer {
  Vector mean;
  Vector stddev;  // sample std (n-1); constant features fall back to 1
};

Standardizer standardize_fit(const Matrix& X);
Matrix standardize_apply(const Standardizer& st, const Matrix& X);
Matrix standardize_invert(const Standardizer& st, const Matrix& X);

// k(u, v) = exp(-|u-v|^2 / scale^2)
double gaussian_kernel(const Eigen::Ref<const Eigen::RowVectorXd>& u,
                       const Eigen::Ref<const Eigen::RowVectorXd>& v,
                       double scale);

struct SmoConfig {
  double kkt_tol = 1e-3;
  long max_iters = 10000;
  // invoked with the dual objective after every pair update (test hook)
  std::function<void(double)> on_objective;
};

// Dual variables on the full training set (box [0, C], sum alpha_i y_i = 0).
struct SmoSolution {
  Vector alpha;
  double bias = 0.0;
  bool converged = false;
  long iterations = 0;
};

SmoSolution smo_solve(const Matrix& gram, const std::vector<int>& y, double box,
                      const SmoConfig& cfg = {});

struct TrainedSvm {
  Standardizer standardizer;
  Matrix support_vectors;  // standardized feature rows
  Vector dual_coeffs;      // alpha_i * y_i, 0 < |coeff| <= C
  double bias = 0.0;
  double kernel_scale = 1.0;
  double box_constraint = 1.0;
  bool converged = true;
  int n_train = 0;
};

// Sequential minimal optimization with maximal-violating-pair selection.
// Labels must be -1/+1 with both classes present.
TrainedSvm smo_train(const Matrix& X, const std::vector<int>& y, double box,
                     double scale, const SmoConfig& cfg = {});

struct Prediction {
  std::vector<int> labels;  // sign of the decision value; ties go to +1
  Vector decision;
};

Prediction predict(const TrainedSvm& model, const Matrix& X);

struct HyperGrid {
  std::vector<double> c_values;
  std::vector<double> scale_factors;  // multiples of the median pairwise distance
  int folds = 10;
};

HyperGrid default_hyper_grid();

struct CvChoice {
  double box = 0.0;
  double scale = 0.0;
  double cv_error = 0.0;
};

double median_pairwise_distance(const Matrix& X);

// Stratified k-fold error per cell; ties break toward smaller C, then larger
// scale.
CvChoice cv_grid_search(const Matrix& X, const std::vector<int>& y,
                        const HyperGrid& grid, Rng& rng,
                        const SmoConfig& cfg = {});

struct EvalResult {
  double generalization_error = 0.0;
  double relative_sv_count = 0.0;
};

EvalResult evaluate(const TrainedSvm& model, const Matrix& X,
                    const std::vector<int>& y);

void save_svm(const std::filesystem::path& path, const TrainedSvm& model);
TrainedSvm load_svm(const std::filesystem::path& path);

}  // namespace simap
