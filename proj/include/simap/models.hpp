#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "simap/linear_ode.hpp"
#include "simap/ode.hpp"
#include "simap/rng.hpp"

namespace simap {

// Ground-truth class-conditional Gaussians (diagonal covariances) plus the
// train/test pool sizes used for experimentation.
struct ClassTask {
  Vector mean0, mean1;
  Vector cov_diag0, cov_diag1;
  int n_train = 0;
  int n_test = 0;

  const Vector& mean(int label) const { return label == 0 ? mean0 : mean1; }
  const Vector& cov_diag(int label) const {
    return label == 0 ? cov_diag0 : cov_diag1;
  }
};

struct GaugeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RegistryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelDefinition {
  std::string name;
  DynamicalSystem system;
  Matrix roi;  // param_dim x 2, closed [min, max] per coordinate
  int sim_dim = 0;
  std::function<Vector(const Vector&)> sim_map;
  ClassTask classes;
  Vector dense_grid;
  Vector noise_fo;   // per-channel observation variances, full observation
  double noise_po;   // scalar observation variance, partial observation
  Vector sigma_range;  // noise-sweep standard deviations
  double exp3_sigma = 0.0;
  std::vector<std::string> param_names;
  // One gauge attempt at strength alpha; may leave the ROI (caller retries).
  std::function<Vector(const Vector&, double, Rng&)> gauge_attempt;

  int param_dim() const { return system.param_dim; }
  bool in_roi(const Vector& theta) const;
  Vector clip_to_roi(const Vector& theta) const;
};

struct InputConstants {
  double s0;
  double k_abs;
  InputConstants();  // Table defaults
};

// Registry, closed to the five example systems.
std::vector<std::string> model_names();
ModelDefinition make_model(const std::string& name,
                           const InputConstants& input = InputConstants());

// --- identifiable-combination maps ------------------------------------------
Vector sim_toy(const Vector& theta);
Vector sim_ccm(int n, const Vector& theta);
Vector sim_cml(const Vector& theta);
Vector sim_cml_laplace(const Vector& theta);  // consistency oracle
Vector sim_br(const Vector& theta);

// Tridiagonal catenary coefficient matrix. `lower` holds k_{i+1,i}
// (k21, k32, ...), `upper` holds k_{i-1,i} (k12, k23, ...).
Matrix build_ccm_matrix(int n, const Vector& leak, const Vector& lower,
                        const Vector& upper);

// CML coefficient matrix from theta = (k01..k04, k12, k21, k23, k42, k34, k43).
Matrix build_cml_matrix(const Vector& theta);

void br_dynamics(double t, const Vector& state, const Vector& theta,
                 Vector& deriv);

// Produces theta' with sim(theta') == sim(theta) and identical partial
// observations; shrinks alpha toward 1 until theta' fits the ROI.
Vector gauge_transform(const ModelDefinition& model, const Vector& theta,
                       double alpha, Rng& rng);

}  // namespace simap
