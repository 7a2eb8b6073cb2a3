#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>

namespace simap {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ObservationMode { kFull, kPartial };

struct IntegrationError : std::runtime_error {
  double time;
  IntegrationError(double t, const std::string& what)
      : std::runtime_error(what + " at t=" + std::to_string(t)), time(t) {}
};

// Parametrised ODE dx/dt = rhs(t, x, theta). Measurement is either the
// identity (full observation) or the projection onto state 1 (partial).
struct DynamicalSystem {
  int state_dim = 0;
  int param_dim = 0;
  std::function<void(double, const Vector&, const Vector&, Vector&)> rhs;
  std::function<double(double)> input;  // scalar forcing u(t); may be empty
  std::function<Vector(const Vector&)> initial_state;  // x0(theta), known
};

inline int observed_dim(const DynamicalSystem& sys, ObservationMode mode) {
  return mode == ObservationMode::kFull ? sys.state_dim : 1;
}

inline Matrix observe(const Matrix& states, ObservationMode mode) {
  if (mode == ObservationMode::kFull) return states;
  return states.col(0);
}

struct Trajectory {
  Vector times;    // copy of the evaluation grid
  Matrix states;   // L x d
  Matrix outputs;  // L x r, measurement applied row-wise
};

// Adaptive RK4(5) with dense-output interpolation onto `grid`. Deterministic;
// throws IntegrationError on step-size underflow or non-finite derivatives.
Trajectory integrate(const DynamicalSystem& sys, const Vector& theta,
                     const Vector& grid, double rel_tol = 1e-8,
                     double abs_tol = 1e-10,
                     ObservationMode mode = ObservationMode::kFull);

}  // namespace simap
