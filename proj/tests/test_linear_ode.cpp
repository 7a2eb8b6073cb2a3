#include <cmath>

#include "doctest.h"
#include "simap/linear_ode.hpp"
#include "simap/models.hpp"
#include "simap/rng.hpp"

using namespace simap;

TEST_CASE("zero matrix gives a constant trajectory") {
  Matrix K = Matrix::Zero(2, 2);
  Vector b(2), x0(2), grid(4);
  b << 1, 0;
  x0 << 1, 0;
  grid << 0, 1, 2, 3;
  const Trajectory traj = linear_solve(K, b, std::nullopt, x0, grid);
  for (int i = 0; i < 4; ++i) {
    CHECK(traj.states(i, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(traj.states(i, 1)) < 1e-14);
  }
}

TEST_CASE("1x1 decay reproduces the exponential") {
  Matrix K(1, 1);
  K << -1.0;
  Vector b = Vector::Ones(1), x0 = Vector::Ones(1), grid(2);
  grid << 0, 1;
  const Trajectory traj = linear_solve(K, b, std::nullopt, x0, grid);
  CHECK(traj.states(1, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("input rate equal to a system eigenvalue is a resonance error") {
  Matrix K(1, 1);
  K << -0.05;  // eigenvalue of -K is 0.05
  Vector b = Vector::Ones(1), x0 = Vector::Zero(1), grid(2);
  grid << 0, 1;
  CHECK_THROWS_AS(
      linear_solve(K, b, ExpInput{100.0, 0.05}, x0, grid), ResonanceError);
  // a perturbed rate is fine
  CHECK_NOTHROW(linear_solve(K, b, ExpInput{100.0, 0.051}, x0, grid));
}

TEST_CASE("cml class-0 closed form agrees with the integrator") {
  const ModelDefinition m = make_model("cml");
  const Vector theta = m.classes.mean0;
  const Matrix K = build_cml_matrix(theta);
  Vector b = Vector::Zero(4);
  b[0] = 1;
  const InputConstants in;
  const Trajectory exact = linear_solve(K, b, ExpInput{in.s0, in.k_abs},
                                        Vector::Zero(4), m.dense_grid);
  const Trajectory rk = integrate(m.system, theta, m.dense_grid, 1e-10, 1e-12);
  CHECK((rk.states - exact.states).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("oracle agreement across ROI samples for the linear family") {
  Rng rng(99);
  for (const std::string name : {"ccm2", "ccm4", "cml"}) {
    const ModelDefinition m = make_model(name);
    const int n = m.param_dim();
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
      Vector theta(n);
      for (int i = 0; i < n; ++i) {
        theta[i] = rng.uniform(m.roi(i, 0), m.roi(i, 1));
      }
      Matrix K;
      if (name == "cml") {
        K = build_cml_matrix(theta);
      } else {
        const int d = m.system.state_dim;
        K = build_ccm_matrix(d, theta.head(d), theta.tail(d - 1),
                             theta.segment(d, d - 1));
      }
      Vector b = Vector::Zero(m.system.state_dim);
      b[0] = 1;
      const InputConstants in;
      const Trajectory exact =
          linear_solve(K, b, ExpInput{in.s0, in.k_abs},
                       Vector::Zero(m.system.state_dim), m.dense_grid);
      const Trajectory rk = integrate(m.system, theta, m.dense_grid);
      worst = std::max(worst,
                       (rk.states - exact.states).cwiseAbs().maxCoeff());
    }
    INFO(name);
    CHECK(worst < 1e-5);
  }
}
