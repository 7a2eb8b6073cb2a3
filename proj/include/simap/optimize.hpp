#pragma once

#include <functional>

#include "simap/ode.hpp"
#include "simap/rng.hpp"

namespace simap {

// Objective to minimize; +inf marks a rejected point.
using BoxObjective = std::function<double(const Vector&)>;

struct AnnealConfig {
  int probes = 50;                // ROI-uniform probes for the temperature
  double cooling = 0.95;          // geometric factor
  int evals_per_temp_factor = 20; // cool every 20*n evaluations
  double step_fraction = 0.1;     // proposal scale: 0.1 * ROI width
  int budget_factor = 3000;       // total evaluations = 3000*n
  double min_step_ratio = 0.01;   // floor on the annealed step scale
};

struct AnnealResult {
  Vector best;
  double best_value = 0.0;
  long evaluations = 0;
  bool any_finite = false;
  double probe_spread = 0.0;  // best-to-worst spread over the finite probes
};

AnnealResult simulated_annealing(const BoxObjective& f, const Matrix& roi,
                                 const AnnealConfig& cfg, Rng& rng);

struct NelderMeadConfig {
  int max_iters = 500;
  double init_fraction = 0.01;  // simplex edge: 1% of ROI width
  double f_tol = 1e-14;
};

struct NelderMeadResult {
  Vector best;
  double best_value = 0.0;
  long evaluations = 0;
};

// Simplex search with every evaluation point clipped into the ROI box.
NelderMeadResult nelder_mead_box(const BoxObjective& f, const Matrix& roi,
                                 const Vector& start,
                                 const NelderMeadConfig& cfg);

// Residual vector of a least-squares objective 1/2 |r(x)|^2.
using ResidualFn = std::function<Vector(const Vector&)>;

struct LmConfig {
  int max_iters = 60;
  double lambda0 = 1e-6;
  double f_tol = 1e-12;  // stop after three consecutive gains below this
  // central-difference step as a fraction of the ROI width; must sit well
  // above the integrator noise floor or the Jacobian turns to noise
  double fd_step = 1e-3;
};

struct LmResult {
  Vector best;
  double best_value = 0.0;  // 1/2 |r|^2 at best
  long evaluations = 0;     // residual evaluations
};

// Damped Gauss-Newton with a finite-difference Jacobian, iterates clipped to
// the ROI. Steps are only ever accepted on improvement.
LmResult levenberg_marquardt_box(const ResidualFn& residuals, const Matrix& roi,
                                 const Vector& start, const LmConfig& cfg);

}  // namespace simap
