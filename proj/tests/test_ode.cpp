#include <cmath>

#include "doctest.h"
#include "simap/linear_ode.hpp"
#include "simap/models.hpp"

using namespace simap;

namespace {

Vector toy_grid() {
  Vector g(11);
  for (int i = 0; i < 11; ++i) g[i] = 0.1 * i;
  return g;
}

Vector make_theta(std::initializer_list<double> vals) {
  Vector v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("toy model matches the analytic solution") {
  const ModelDefinition toy = make_model("toy");
  const Trajectory traj =
      integrate(toy.system, make_theta({1.0, 1.0}), toy_grid());
  for (int i = 0; i < 11; ++i) {
    CHECK(std::abs(traj.outputs(i, 0) - std::exp(-0.1 * i)) < 1e-8);
  }
  CHECK(std::abs(traj.outputs(10, 0) - std::exp(-1.0)) < 1e-6);
}

TEST_CASE("zero dynamics stays constant") {
  const ModelDefinition toy = make_model("toy");
  const Trajectory traj =
      integrate(toy.system, make_theta({0.0, 5.0}), toy_grid());
  for (int i = 0; i < 11; ++i) CHECK(traj.outputs(i, 0) == 1.0);
}

TEST_CASE("ccm2 agrees with the linear oracle") {
  const ModelDefinition m = make_model("ccm2");
  const Vector theta = m.classes.mean0;
  const Trajectory rk = integrate(m.system, theta, m.dense_grid, 1e-10, 1e-12);

  const Matrix K = build_ccm_matrix(2, theta.head(2), theta.tail(1),
                                    theta.segment(2, 1));
  Vector b(2);
  b << 1, 0;
  const InputConstants in;
  const Trajectory exact = linear_solve(K, b, ExpInput{in.s0, in.k_abs},
                                        Vector::Zero(2), m.dense_grid);
  const double dev = (rk.states - exact.states).cwiseAbs().maxCoeff();
  CHECK(dev < 1e-6);
}

TEST_CASE("integration is bit-deterministic") {
  const ModelDefinition m = make_model("br");
  const Vector theta = m.classes.mean0;
  const Trajectory a = integrate(m.system, theta, m.dense_grid);
  const Trajectory b = integrate(m.system, theta, m.dense_grid);
  CHECK((a.states.array() == b.states.array()).all());
}

TEST_CASE("grid refinement: tighter tolerance moves outputs less than 10x tol") {
  const ModelDefinition m = make_model("br");
  const Vector theta = m.classes.mean0;
  for (double tol : {1e-6, 1e-8}) {
    const Trajectory coarse = integrate(m.system, theta, m.dense_grid, tol, tol * 1e-2);
    const Trajectory fine =
        integrate(m.system, theta, m.dense_grid, tol / 2, tol * 1e-2 / 2);
    const double scale = coarse.states.cwiseAbs().maxCoeff();
    const double diff = (coarse.states - fine.states).cwiseAbs().maxCoeff();
    CHECK(diff < 10.0 * tol * std::max(1.0, scale));
  }
}

TEST_CASE("non-finite derivative raises an integration failure with the time") {
  DynamicalSystem sys;
  sys.state_dim = 1;
  sys.param_dim = 1;
  sys.rhs = [](double t, const Vector& x, const Vector&, Vector& dx) {
    dx[0] = t < 0.5 ? -x[0] : std::numeric_limits<double>::quiet_NaN();
  };
  sys.initial_state = [](const Vector&) { return Vector::Ones(1); };
  Vector grid(3);
  grid << 0.0, 0.4, 1.0;
  try {
    integrate(sys, Vector::Ones(1), grid);
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.time >= 0.4);
    CHECK(e.time <= 1.0);
  }
}

TEST_CASE("blow-up ends in an integration failure") {
  DynamicalSystem sys;
  sys.state_dim = 1;
  sys.param_dim = 1;
  sys.rhs = [](double, const Vector& x, const Vector&, Vector& dx) {
    dx[0] = x[0] * x[0];  // finite-time escape from x0 = 2 before t = 1
  };
  sys.initial_state = [](const Vector&) { return Vector::Constant(1, 2.0); };
  Vector grid(2);
  grid << 0.0, 1.0;
  CHECK_THROWS_AS(integrate(sys, Vector::Ones(1), grid), IntegrationError);
}

TEST_CASE("argument validation") {
  const ModelDefinition toy = make_model("toy");
  Vector bad_grid(2);
  bad_grid << 0.5, 1.0;  // does not start at 0
  CHECK_THROWS_AS(integrate(toy.system, make_theta({1, 1}), bad_grid),
                  std::invalid_argument);
  Vector decreasing(3);
  decreasing << 0.0, 0.7, 0.3;
  CHECK_THROWS_AS(integrate(toy.system, make_theta({1, 1}), decreasing),
                  std::invalid_argument);
  CHECK_THROWS_AS(integrate(toy.system, make_theta({1, 1}), toy_grid(), -1.0),
                  std::invalid_argument);
}
