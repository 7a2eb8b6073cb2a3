#include "simap/models.hpp"

#include <algorithm>
#include <cmath>

#include "simap/model_constants.hpp"

namespace simap {

namespace c = constants;

InputConstants::InputConstants()
    : s0(c::kDefaultInputS0), k_abs(c::kDefaultInputKabs) {}

bool ModelDefinition::in_roi(const Vector& theta) const {
  if (theta.size() != roi.rows()) return false;
  for (int i = 0; i < theta.size(); ++i) {
    if (!(theta[i] >= roi(i, 0) && theta[i] <= roi(i, 1))) return false;
  }
  return true;
}

Vector ModelDefinition::clip_to_roi(const Vector& theta) const {
  Vector out = theta;
  for (int i = 0; i < out.size(); ++i) {
    out[i] = std::clamp(out[i], roi(i, 0), roi(i, 1));
  }
  return out;
}

std::vector<std::string> model_names() {
  return {"toy", "ccm2", "ccm4", "cml", "br"};
}

// ---- identifiable combinations ----------------------------------------------

Vector sim_toy(const Vector& theta) {
  Vector phi(1);
  phi[0] = theta[0] * theta[1];
  return phi;
}

namespace {

// theta layout for the catenary family: (k01..k0n, k12..k_{n-1,n}, k21..k_{n,n-1})
struct CcmView {
  const Vector& t;
  int n;
  double leak(int i) const { return t[i]; }           // k_{0,i+1}
  double upper(int i) const { return t[n + i]; }      // k_{i+1,i+2}
  double lower(int i) const { return t[2 * n - 1 + i]; }  // k_{i+2,i+1}
  // diagonal entry k_{cc}, c in 1..n
  double diag(int cidx) const {
    double out = -leak(cidx);
    if (cidx <= n - 2) out -= lower(cidx);   // k_{c+1,c}
    if (cidx >= 1) out -= upper(cidx - 1);   // k_{c-1,c}
    return out;
  }
};

}  // namespace

Vector sim_ccm(int n, const Vector& theta) {
  if (theta.size() != 3 * n - 2) {
    throw std::invalid_argument("sim_ccm: theta must have length 3n-2");
  }
  CcmView v{theta, n};
  Vector phi(2 * n - 1);
  for (int i = 0; i < n; ++i) phi[i] = v.diag(i);
  for (int j = 0; j < n - 1; ++j) phi[n + j] = v.lower(j) * v.upper(j);
  return phi;
}

Vector sim_cml(const Vector& theta) {
  const double k01 = theta[0], k02 = theta[1], k03 = theta[2], k04 = theta[3];
  const double k12 = theta[4], k21 = theta[5], k23 = theta[6], k42 = theta[7];
  const double k34 = theta[8], k43 = theta[9];
  Vector phi(7);
  phi[0] = k12 * k21;
  phi[1] = k34 * k43;
  phi[2] = k01 + k21;
  phi[3] = k02 + k12 + k42;
  phi[4] = k03 + k23 + k43;
  phi[5] = k04 + k34;
  phi[6] = k23 * k42 * k34;
  return phi;
}

// Laplace-transform combinations: the coefficients of the observed transfer
// function's numerator (Phi~1..3) and denominator (Phi~4..7) polynomials.
Vector sim_cml_laplace(const Vector& theta) {
  const double k01 = theta[0], k02 = theta[1], k03 = theta[2], k04 = theta[3];
  const double k12 = theta[4], k21 = theta[5], k23 = theta[6], k42 = theta[7];
  const double k34 = theta[8], k43 = theta[9];
  Vector p(7);
  p[0] = k04 * k12 * k23 + k12 * k23 * k34 + k04 * k23 * k42 + k04 * k12 * k43 +
         k03 * (k04 + k34) * (k12 + k42) + k04 * k42 * k43 +
         k02 * (k23 * k34 + k03 * (k04 + k34) + k04 * (k23 + k43));
  p[1] = k04 * k12 + k04 * k23 + k12 * k23 + k12 * k34 + k23 * k34 +
         k04 * k42 + k23 * k42 + k34 * k42 + k03 * (k04 + k12 + k34 + k42) +
         k04 * k43 + k12 * k43 + k42 * k43 +
         k02 * (k03 + k04 + k23 + k34 + k43);
  p[2] = k02 + k03 + k04 + k12 + k23 + k34 + k42 + k43;
  p[3] = k21 * (k02 * k23 * k34 + k02 * k03 * (k04 + k34) +
                k03 * (k04 + k34) * k42 + k02 * k04 * (k23 + k43) +
                k04 * k42 * (k23 + k43)) +
         k01 * p[0];
  p[4] = k03 * k04 * k12 + k03 * k04 * k21 + k04 * k12 * k23 +
         k04 * k21 * k23 + k03 * k12 * k34 + k03 * k21 * k34 +
         k12 * k23 * k34 + k21 * k23 * k34 + k03 * k04 * k42 +
         k03 * k21 * k42 + k04 * k21 * k42 + k04 * k23 * k42 +
         k21 * k23 * k42 + k03 * k34 * k42 + k21 * k34 * k42 +
         k04 * k12 * k43 + k04 * k21 * k43 + k04 * k42 * k43 +
         k21 * k42 * k43 +
         k02 * (k21 * k23 + k21 * k34 + k23 * k34 +
                k03 * (k04 + k21 + k34) + k21 * k43 +
                k04 * (k21 + k23 + k43)) +
         k01 * p[1];
  p[5] = k03 * k04 + k03 * k12 + k04 * k12 + k03 * k21 + k04 * k21 +
         k04 * k23 + k12 * k23 + k21 * k23 + k03 * k34 + k12 * k34 +
         k21 * k34 + k23 * k34 + k03 * k42 + k04 * k42 + k21 * k42 +
         k23 * k42 + k34 * k42 + k04 * k43 + k12 * k43 + k21 * k43 +
         k42 * k43 + k02 * (k03 + k04 + k21 + k23 + k34 + k43) +
         k01 * p[2];
  p[6] = k01 + k02 + k03 + k04 + k12 + k21 + k23 + k34 + k42 + k43;
  return p;
}

Vector sim_br(const Vector& theta) {
  const double b1 = theta[0], b2 = theta[1], mu_m = theta[2], ks = theta[3],
               y = theta[4], kd = theta[5];
  if (ks == 0.0) throw std::domain_error("sim_br: Ks must be positive");
  Vector phi(5);
  phi[0] = b1;
  phi[1] = mu_m;
  phi[2] = kd;
  phi[3] = b2 * y;
  phi[4] = b2 / ks;
  return phi;
}

Matrix build_ccm_matrix(int n, const Vector& leak, const Vector& lower,
                        const Vector& upper) {
  if (n < 2) throw std::domain_error("build_ccm_matrix: need n >= 2");
  if (leak.size() != n || lower.size() != n - 1 || upper.size() != n - 1) {
    throw std::invalid_argument("build_ccm_matrix: rate count mismatch");
  }
  if ((leak.array() < 0).any() || (lower.array() < 0).any() ||
      (upper.array() < 0).any()) {
    throw std::domain_error("build_ccm_matrix: negative rate");
  }
  Matrix K = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double d = -leak[i];
    if (i <= n - 2) d -= lower[i];
    if (i >= 1) d -= upper[i - 1];
    K(i, i) = d;
    if (i <= n - 2) {
      K(i + 1, i) = lower[i];
      K(i, i + 1) = upper[i];
    }
  }
  return K;
}

Matrix build_cml_matrix(const Vector& theta) {
  const double k01 = theta[0], k02 = theta[1], k03 = theta[2], k04 = theta[3];
  const double k12 = theta[4], k21 = theta[5], k23 = theta[6], k42 = theta[7];
  const double k34 = theta[8], k43 = theta[9];
  Matrix K = Matrix::Zero(4, 4);
  K(0, 0) = -(k01 + k21);
  K(0, 1) = k12;
  K(1, 0) = k21;
  K(1, 1) = -(k02 + k12 + k42);
  K(1, 2) = k23;
  K(2, 2) = -(k03 + k23 + k43);
  K(2, 3) = k34;
  K(3, 1) = k42;
  K(3, 2) = k43;
  K(3, 3) = -(k04 + k34);
  return K;
}

void br_dynamics(double /*t*/, const Vector& state, const Vector& theta,
                 Vector& deriv) {
  const double mu_m = theta[2], ks = theta[3], y = theta[4], kd = theta[5];
  if (y == 0.0) throw std::domain_error("br_dynamics: Y must be nonzero");
  const double x = state[0], s = state[1];
  const double growth = mu_m * s * x / (ks + s);
  deriv[0] = growth - kd * x;
  deriv[1] = -growth / y;
}

// ---- system assembly --------------------------------------------------------

namespace {

Vector linspace_step(double start, double step, double end) {
  const int count = static_cast<int>(std::lround((end - start) / step)) + 1;
  Vector g(count);
  for (int i = 0; i < count; ++i) g[i] = start + i * step;
  g[count - 1] = end;
  return g;
}

Matrix box_roi(int n, double lo, double hi) {
  Matrix roi(n, 2);
  for (int i = 0; i < n; ++i) {
    roi(i, 0) = lo;
    roi(i, 1) = hi;
  }
  return roi;
}

Vector to_vec(const double* data, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = data[i];
  return v;
}

std::function<double(double)> exp_input(const InputConstants& in) {
  return [s0 = in.s0, k = in.k_abs](double t) {
    return s0 * k * std::exp(-k * t);
  };
}

ModelDefinition make_toy() {
  ModelDefinition m;
  m.name = "toy";
  m.system.state_dim = 1;
  m.system.param_dim = 2;
  m.system.rhs = [](double, const Vector& x, const Vector& th, Vector& dx) {
    dx[0] = -th[0] * th[1] * x[0];
  };
  m.system.initial_state = [](const Vector&) {
    Vector x0(1);
    x0[0] = 1.0;
    return x0;
  };
  m.roi = Matrix(2, 2);
  for (int i = 0; i < 2; ++i) {
    m.roi(i, 0) = c::kToyRoi[i][0];
    m.roi(i, 1) = c::kToyRoi[i][1];
  }
  m.sim_dim = 1;
  m.sim_map = sim_toy;
  m.classes = {to_vec(c::kToyMean0, 2), to_vec(c::kToyMean1, 2),
               Vector::Constant(2, c::kToyVar), Vector::Constant(2, c::kToyVar),
               c::kToyTrain, c::kToyTest};
  m.dense_grid = linspace_step(c::kToyGridStart, c::kToyGridStep, c::kToyGridEnd);
  m.noise_fo = Vector::Constant(1, c::kToyNoiseFoVar);
  m.noise_po = c::kToyNoisePoVar;
  m.sigma_range = to_vec(c::kToySigmaRange, 7);
  m.exp3_sigma = c::kToyExp3Sigma;
  m.param_names = {"a", "b"};
  m.gauge_attempt = [](const Vector& th, double a, Rng&) {
    Vector out(2);
    out[0] = a * th[0];
    out[1] = th[1] / a;
    return out;
  };
  return m;
}

ModelDefinition make_ccm(int n, const InputConstants& input) {
  ModelDefinition m;
  m.name = n == 2 ? "ccm2" : "ccm4";
  const int npar = 3 * n - 2;
  m.system.state_dim = n;
  m.system.param_dim = npar;
  m.system.input = exp_input(input);
  m.system.rhs = [n, u = m.system.input](double t, const Vector& x,
                                         const Vector& th, Vector& dx) {
    CcmView v{th, n};
    for (int i = 0; i < n; ++i) {
      double acc = v.diag(i) * x[i];
      if (i <= n - 2) acc += v.upper(i) * x[i + 1];
      if (i >= 1) acc += v.lower(i - 1) * x[i - 1];
      dx[i] = acc;
    }
    dx[0] += u(t);
  };
  m.system.initial_state = [n](const Vector&) { return Vector::Zero(n); };
  m.roi = box_roi(npar, c::kCcmRoiMin, c::kCcmRoiMax);
  m.sim_dim = 2 * n - 1;
  m.sim_map = [n](const Vector& th) { return sim_ccm(n, th); };
  if (n == 2) {
    m.classes = {to_vec(c::kCcm2Mean0, 4), to_vec(c::kCcm2Mean1, 4),
                 Vector::Constant(4, c::kCompartmentalCovVar),
                 Vector::Constant(4, c::kCompartmentalCovVar), c::kCcm2Train,
                 c::kCcm2Test};
    m.param_names = {"k01", "k02", "k12", "k21"};
  } else {
    m.classes = {to_vec(c::kCcm4Mean0, 10), to_vec(c::kCcm4Mean1, 10),
                 Vector::Constant(10, c::kCompartmentalCovVar),
                 Vector::Constant(10, c::kCompartmentalCovVar), c::kCcm4Train,
                 c::kCcm4Test};
    m.param_names = {"k01", "k02", "k03", "k04", "k12",
                     "k23", "k34", "k21", "k32", "k43"};
  }
  m.dense_grid = linspace_step(c::kCcmGridStart, c::kCcmGridStep, c::kCcmGridEnd);
  m.noise_fo = Vector::Constant(n, c::kCcmNoiseVar);
  m.noise_po = c::kCcmNoiseVar;
  m.sigma_range = to_vec(c::kCcmSigmaRange, 6);
  m.exp3_sigma = c::kCcmExp3Sigma;
  // Scale compartment contents link by link; leakages absorb the change so
  // every diagonal entry (and hence the observed output) is preserved.
  m.gauge_attempt = [n](const Vector& th, double a, Rng& rng) {
    CcmView v{th, n};
    Vector out = th;
    Vector factor(n - 1);
    for (int j = 0; j < n - 1; ++j) {
      factor[j] = 1.0 + (a - 1.0) * rng.uniform(0.5, 1.5);
    }
    for (int j = 0; j < n - 1; ++j) {
      out[2 * n - 1 + j] = v.lower(j) / factor[j];
      out[n + j] = v.upper(j) * factor[j];
    }
    for (int i = 0; i < n; ++i) {
      double leak = v.leak(i);
      if (i <= n - 2) leak += v.lower(i) - out[2 * n - 1 + i];
      if (i >= 1) leak += v.upper(i - 1) - out[n + i - 1];
      out[i] = leak;
    }
    return out;
  };
  return m;
}

ModelDefinition make_cml(const InputConstants& input) {
  ModelDefinition m;
  m.name = "cml";
  m.system.state_dim = 4;
  m.system.param_dim = 10;
  m.system.input = exp_input(input);
  m.system.rhs = [u = m.system.input](double t, const Vector& x,
                                      const Vector& th, Vector& dx) {
    const double k01 = th[0], k02 = th[1], k03 = th[2], k04 = th[3];
    const double k12 = th[4], k21 = th[5], k23 = th[6], k42 = th[7];
    const double k34 = th[8], k43 = th[9];
    dx[0] = -(k01 + k21) * x[0] + k12 * x[1] + u(t);
    dx[1] = k21 * x[0] - (k02 + k12 + k42) * x[1] + k23 * x[2];
    dx[2] = -(k03 + k23 + k43) * x[2] + k34 * x[3];
    dx[3] = k42 * x[1] + k43 * x[2] - (k04 + k34) * x[3];
  };
  m.system.initial_state = [](const Vector&) { return Vector::Zero(4); };
  m.roi = box_roi(10, c::kCcmRoiMin, c::kCcmRoiMax);
  m.sim_dim = 7;
  m.sim_map = sim_cml;
  m.classes = {to_vec(c::kCmlMean0, 10), to_vec(c::kCmlMean1, 10),
               Vector::Constant(10, c::kCompartmentalCovVar),
               Vector::Constant(10, c::kCompartmentalCovVar), c::kCmlTrain,
               c::kCmlTest};
  m.dense_grid = linspace_step(c::kCcmGridStart, c::kCcmGridStep, c::kCcmGridEnd);
  m.noise_fo = Vector::Constant(4, c::kCcmNoiseVar);
  m.noise_po = c::kCcmNoiseVar;
  m.sigma_range = to_vec(c::kCcmSigmaRange, 6);
  m.exp3_sigma = c::kCcmExp3Sigma;
  m.param_names = {"k01", "k02", "k03", "k04", "k12",
                   "k21", "k23", "k42", "k34", "k43"};
  // Two independent content scalings: alpha on compartment 2, beta on the
  // 3-4 pair; k42 is untouched and leakages compensate the diagonals.
  m.gauge_attempt = [](const Vector& th, double a, Rng& rng) {
    const double b = 1.0 + (a - 1.0) * rng.uniform(0.25, 1.0);
    const double k01 = th[0], k02 = th[1], k03 = th[2], k04 = th[3];
    const double k12 = th[4], k21 = th[5], k23 = th[6], k42 = th[7];
    const double k34 = th[8], k43 = th[9];
    Vector out(10);
    out[0] = k01 + k21 * (1.0 - 1.0 / a);
    out[1] = k02 + k12 * (1.0 - a);
    out[2] = k03 + (k23 + k43) * (1.0 - 1.0 / b);
    out[3] = k04 + k34 * (1.0 - b);
    out[4] = a * k12;
    out[5] = k21 / a;
    out[6] = k23 / b;
    out[7] = k42;
    out[8] = b * k34;
    out[9] = k43 / b;
    return out;
  };
  return m;
}

ModelDefinition make_br() {
  ModelDefinition m;
  m.name = "br";
  m.system.state_dim = 2;
  m.system.param_dim = 6;
  m.system.rhs = br_dynamics;
  m.system.initial_state = [](const Vector& th) {
    Vector x0(2);
    x0[0] = th[0];
    x0[1] = th[1];
    return x0;
  };
  m.roi = Matrix(6, 2);
  for (int i = 0; i < 6; ++i) {
    m.roi(i, 0) = c::kBrRoi[i][0];
    m.roi(i, 1) = c::kBrRoi[i][1];
  }
  m.sim_dim = 5;
  m.sim_map = sim_br;
  m.classes = {to_vec(c::kBrMean0, 6), to_vec(c::kBrMean1, 6),
               to_vec(c::kBrCovDiag, 6), to_vec(c::kBrCovDiag, 6), c::kBrTrain,
               c::kBrTest};
  m.dense_grid = linspace_step(c::kBrGridStart, c::kBrGridStep, c::kBrGridEnd);
  m.noise_fo = Vector::Constant(2, c::kBrNoiseVar);
  m.noise_po = c::kBrNoiseVar;
  m.sigma_range = to_vec(c::kBrSigmaRange, 6);
  m.exp3_sigma = c::kBrExp3Sigma;
  m.param_names = {"b1", "b2", "mu_m", "Ks", "Y", "Kd"};
  // (b2, Ks) scale together while Y compensates, so b2*Y, b2/Ks and the
  // observed biomass trajectory are unchanged.
  m.gauge_attempt = [](const Vector& th, double a, Rng&) {
    Vector out = th;
    out[1] = a * th[1];
    out[3] = a * th[3];
    out[4] = th[4] / a;
    return out;
  };
  return m;
}

}  // namespace

ModelDefinition make_model(const std::string& name,
                           const InputConstants& input) {
  if (name == "toy") return make_toy();
  if (name == "ccm2") return make_ccm(2, input);
  if (name == "ccm4") return make_ccm(4, input);
  if (name == "cml") return make_cml(input);
  if (name == "br") return make_br();
  throw RegistryError("unknown model '" + name +
                      "' (expected toy, ccm2, ccm4, cml or br)");
}

Vector gauge_transform(const ModelDefinition& model, const Vector& theta,
                       double alpha, Rng& rng) {
  if (!(alpha > 0.0)) throw std::invalid_argument("gauge_transform: alpha <= 0");
  double a = alpha;
  for (int attempt = 0; attempt < 100; ++attempt) {
    Vector cand = model.gauge_attempt(theta, a, rng);
    if (model.in_roi(cand)) return cand;
    a = 1.0 + 0.5 * (a - 1.0);
  }
  throw GaugeError("gauge_transform: no admissible transform for model " +
                   model.name);
}

}  // namespace simap
