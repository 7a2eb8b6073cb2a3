#pragma once

#include <optional>
#include <stdexcept>

#include "simap/ode.hpp"

namespace simap {

// u(t) = s0 * k_abs * exp(-k_abs * t)
struct ExpInput {
  double s0 = 0.0;
  double k_abs = 0.0;
};

struct ResonanceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Closed-form solution of xdot = K x + b u(t) via eigendecomposition.
// Test oracle only; the training pipeline never calls this.
Trajectory linear_solve(const Matrix& K, const Vector& b_in,
                        const std::optional<ExpInput>& u, const Vector& x0,
                        const Vector& grid,
                        ObservationMode mode = ObservationMode::kFull);

}  // namespace simap
