#include "simap/ode.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <vector>

namespace simap {

namespace {

using State = std::vector<double>;

struct RhsAdapter {
  const DynamicalSystem* sys;
  const Vector* theta;
  mutable Vector x_buf, dx_buf;
  mutable double last_t = 0.0;

  void operator()(const State& x, State& dxdt, double t) const {
    last_t = t;
    for (int i = 0; i < sys->state_dim; ++i) {
      if (!std::isfinite(x[i])) {
        throw IntegrationError(t, "non-finite state");
      }
      x_buf[i] = x[i];
    }
    sys->rhs(t, x_buf, *theta, dx_buf);
    for (int i = 0; i < sys->state_dim; ++i) {
      if (!std::isfinite(dx_buf[i])) {
        throw IntegrationError(t, "non-finite derivative");
      }
      dxdt[i] = dx_buf[i];
    }
  }
};

}  // namespace

Trajectory integrate(const DynamicalSystem& sys, const Vector& theta,
                     const Vector& grid, double rel_tol, double abs_tol,
                     ObservationMode mode) {
  namespace ode = boost::numeric::odeint;

  if (theta.size() != sys.param_dim || !theta.allFinite()) {
    throw std::invalid_argument("integrate: bad parameter vector");
  }
  if (grid.size() < 1 || grid[0] != 0.0) {
    throw std::invalid_argument("integrate: grid must start at 0");
  }
  for (int i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("integrate: grid must be strictly increasing");
    }
  }
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw std::invalid_argument("integrate: tolerances must be positive");
  }

  const int d = sys.state_dim;
  const int L = static_cast<int>(grid.size());

  Vector x0 = sys.initial_state(theta);
  State x(x0.data(), x0.data() + d);

  RhsAdapter f{&sys, &theta, Vector(d), Vector(d)};

  Trajectory traj;
  traj.times = grid;
  traj.states.resize(L, d);

  std::vector<double> times(grid.data(), grid.data() + L);
  int row = 0;
  auto observer = [&](const State& s, double /*t*/) {
    for (int j = 0; j < d; ++j) traj.states(row, j) = s[j];
    ++row;
  };

  const double span = L > 1 ? grid[L - 1] - grid[0] : 1.0;
  const double dt0 = span / 100.0;

  try {
    auto stepper = ode::make_dense_output(
        abs_tol, rel_tol, ode::runge_kutta_dopri5<State>());
    // the step checker rejects pathological parameter corners (near-singular
    // vector fields) instead of grinding with micro steps
    ode::integrate_times(stepper, std::ref(f), x, times.begin(), times.end(),
                         dt0, observer, ode::max_step_checker(5000));
  } catch (const IntegrationError&) {
    throw;
  } catch (const std::overflow_error&) {
    throw IntegrationError(f.last_t, "step size underflow");
  } catch (const std::runtime_error& e) {
    throw IntegrationError(f.last_t, std::string("integration failed: ") + e.what());
  }

  traj.outputs = observe(traj.states, mode);
  return traj;
}

}  // namespace simap
