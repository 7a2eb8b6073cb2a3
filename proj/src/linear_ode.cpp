#include "simap/linear_ode.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>

namespace simap {

// Homogeneous part through K = V diag(lambda) V^-1; the exponential input
// contributes a particular solution w e^{-k_abs t} with
// (K + k_abs I) w = -s0 k_abs b.
Trajectory linear_solve(const Matrix& K, const Vector& b_in,
                        const std::optional<ExpInput>& u, const Vector& x0,
                        const Vector& grid, ObservationMode mode) {
  const int d = static_cast<int>(K.rows());
  if (K.cols() != d || x0.size() != d) {
    throw std::invalid_argument("linear_solve: dimension mismatch");
  }
  if (!K.allFinite()) {
    throw std::invalid_argument("linear_solve: non-finite coefficient matrix");
  }

  Eigen::EigenSolver<Matrix> eig(K);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("linear_solve: eigendecomposition failed");
  }
  const Eigen::VectorXcd lambda = eig.eigenvalues();
  const Eigen::MatrixXcd V = eig.eigenvectors();

  Eigen::FullPivLU<Eigen::MatrixXcd> v_lu(V);
  if (!v_lu.isInvertible()) {
    throw std::runtime_error("linear_solve: defective coefficient matrix");
  }

  Vector w = Vector::Zero(d);
  double k_abs = 0.0;
  bool has_input = u.has_value() && u->s0 != 0.0;
  if (has_input) {
    k_abs = u->k_abs;
    for (int i = 0; i < d; ++i) {
      if (std::abs(lambda[i] - std::complex<double>(-k_abs, 0.0)) < 1e-12) {
        throw ResonanceError(
            "linear_solve: input rate coincides with a system eigenvalue");
      }
    }
    Matrix A = K + k_abs * Matrix::Identity(d, d);
    w = A.fullPivLu().solve((-u->s0 * k_abs) * b_in);
  }

  const Eigen::VectorXcd c = v_lu.solve((x0 - w).cast<std::complex<double>>());

  const int L = static_cast<int>(grid.size());
  Trajectory traj;
  traj.times = grid;
  traj.states.resize(L, d);
  for (int i = 0; i < L; ++i) {
    const double t = grid[i];
    Eigen::VectorXcd z(d);
    for (int j = 0; j < d; ++j) z[j] = std::exp(lambda[j] * t) * c[j];
    Eigen::VectorXcd xt = V * z;
    for (int j = 0; j < d; ++j) {
      traj.states(i, j) = xt[j].real() + (has_input ? w[j] * std::exp(-k_abs * t) : 0.0);
    }
  }
  traj.outputs = observe(traj.states, mode);
  return traj;
}

}  // namespace simap
