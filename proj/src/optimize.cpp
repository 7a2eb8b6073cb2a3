#include "simap/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace simap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double reflect_into(double v, double lo, double hi) {
  if (lo == hi) return lo;
  for (int guard = 0; guard < 64 && (v < lo || v > hi); ++guard) {
    if (v < lo) v = 2 * lo - v;
    if (v > hi) v = 2 * hi - v;
  }
  return std::clamp(v, lo, hi);
}

}  // namespace

AnnealResult simulated_annealing(const BoxObjective& f, const Matrix& roi,
                                 const AnnealConfig& cfg, Rng& rng) {
  const int n = static_cast<int>(roi.rows());
  Vector width(n);
  for (int i = 0; i < n; ++i) width[i] = roi(i, 1) - roi(i, 0);

  AnnealResult res;
  res.best_value = kInf;

  // temperature from the spread of ROI-uniform probes
  std::vector<double> probe_vals;
  probe_vals.reserve(cfg.probes);
  for (int p = 0; p < cfg.probes; ++p) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = rng.uniform(roi(i, 0), roi(i, 1));
    const double v = f(x);
    ++res.evaluations;
    if (std::isfinite(v)) {
      probe_vals.push_back(v);
      if (v < res.best_value) {
        res.best_value = v;
        res.best = x;
      }
    }
  }
  res.any_finite = !probe_vals.empty();

  double t0 = 1.0;
  if (!probe_vals.empty()) {
    std::sort(probe_vals.begin(), probe_vals.end());
    res.probe_spread = probe_vals.back() - probe_vals.front();
    if (probe_vals.size() >= 4) {
      const double q1 = probe_vals[probe_vals.size() / 4];
      const double q3 = probe_vals[(3 * probe_vals.size()) / 4];
      t0 = std::max(q3 - q1, 1e-12);
    }
  }

  const long total_budget = static_cast<long>(cfg.budget_factor) * n;
  const long per_temp = std::max(1L, static_cast<long>(cfg.evals_per_temp_factor) * n);

  if (!res.any_finite) {
    // keep probing the rest of the budget before giving up
    while (res.evaluations < total_budget) {
      Vector x(n);
      for (int i = 0; i < n; ++i) x[i] = rng.uniform(roi(i, 0), roi(i, 1));
      const double v = f(x);
      ++res.evaluations;
      if (std::isfinite(v)) {
        res.any_finite = true;
        res.best_value = v;
        res.best = x;
        break;
      }
    }
    if (!res.any_finite) return res;
  }

  Vector cur = res.best;
  double cur_val = res.best_value;
  double temp = t0;
  long since_cool = 0;

  Vector cand(n);
  while (res.evaluations < total_budget) {
    const double step_ratio =
        std::max(temp / t0, cfg.min_step_ratio) * cfg.step_fraction;
    for (int i = 0; i < n; ++i) {
      const double step = step_ratio * width[i] * rng.normal();
      cand[i] = reflect_into(cur[i] + step, roi(i, 0), roi(i, 1));
    }
    const double v = f(cand);
    ++res.evaluations;
    ++since_cool;

    const double delta = v - cur_val;
    if (delta <= 0.0 ||
        (std::isfinite(v) && rng.uniform01() < std::exp(-delta / temp))) {
      cur = cand;
      cur_val = v;
      if (v < res.best_value) {
        res.best_value = v;
        res.best = cur;
      }
    }
    if (since_cool >= per_temp) {
      temp *= cfg.cooling;
      since_cool = 0;
    }
  }
  return res;
}

NelderMeadResult nelder_mead_box(const BoxObjective& f, const Matrix& roi,
                                 const Vector& start,
                                 const NelderMeadConfig& cfg) {
  const int n = static_cast<int>(start.size());

  auto clip = [&](Vector x) {
    for (int i = 0; i < n; ++i) x[i] = std::clamp(x[i], roi(i, 0), roi(i, 1));
    return x;
  };

  NelderMeadResult res;
  std::vector<Vector> pts(n + 1);
  std::vector<double> vals(n + 1);

  pts[0] = clip(start);
  vals[0] = f(pts[0]);
  ++res.evaluations;
  for (int i = 0; i < n; ++i) {
    Vector p = pts[0];
    const double h = cfg.init_fraction * (roi(i, 1) - roi(i, 0));
    p[i] = p[i] + h <= roi(i, 1) ? p[i] + h : p[i] - h;
    pts[i + 1] = clip(p);
    vals[i + 1] = f(pts[i + 1]);
    ++res.evaluations;
  }

  auto order = [&]() {
    for (std::size_t a = 1; a < pts.size(); ++a) {
      Vector p = pts[a];
      double v = vals[a];
      std::size_t b = a;
      while (b > 0 && vals[b - 1] > v) {
        pts[b] = pts[b - 1];
        vals[b] = vals[b - 1];
        --b;
      }
      pts[b] = std::move(p);
      vals[b] = v;
    }
  };

  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    order();
    if (std::isfinite(vals[n]) && vals[n] - vals[0] < cfg.f_tol) break;

    Vector centroid = Vector::Zero(n);
    for (int i = 0; i < n; ++i) centroid += pts[i];
    centroid /= n;

    Vector xr = clip(centroid + alpha * (centroid - pts[n]));
    const double fr = f(xr);
    ++res.evaluations;

    if (fr < vals[0]) {
      Vector xe = clip(centroid + gamma * (centroid - pts[n]));
      const double fe = f(xe);
      ++res.evaluations;
      if (fe < fr) {
        pts[n] = xe;
        vals[n] = fe;
      } else {
        pts[n] = xr;
        vals[n] = fr;
      }
    } else if (fr < vals[n - 1]) {
      pts[n] = xr;
      vals[n] = fr;
    } else {
      Vector xc = clip(centroid + rho * (pts[n] - centroid));
      const double fc = f(xc);
      ++res.evaluations;
      if (fc < vals[n]) {
        pts[n] = xc;
        vals[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          pts[i] = clip(pts[0] + sigma * (pts[i] - pts[0]));
          vals[i] = f(pts[i]);
          ++res.evaluations;
        }
      }
    }
  }
  order();
  res.best = pts[0];
  res.best_value = vals[0];
  return res;
}

LmResult levenberg_marquardt_box(const ResidualFn& residuals, const Matrix& roi,
                                 const Vector& start, const LmConfig& cfg) {
  const int n = static_cast<int>(start.size());

  auto clip = [&](Vector x) {
    for (int i = 0; i < n; ++i) x[i] = std::clamp(x[i], roi(i, 0), roi(i, 1));
    return x;
  };
  auto value = [](const Vector& r) {
    const double v = 0.5 * r.squaredNorm();
    return std::isfinite(v) ? v : kInf;
  };

  LmResult res;
  res.best = clip(start);
  Vector r = residuals(res.best);
  ++res.evaluations;
  res.best_value = value(r);
  if (!std::isfinite(res.best_value)) return res;

  const int m = static_cast<int>(r.size());
  double lambda = cfg.lambda0;
  Matrix J(m, n);
  int small_gains = 0;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // central differences; the step must stay well above the integrator
    // noise floor or directions of weak curvature drown in it
    for (int i = 0; i < n; ++i) {
      const double width = roi(i, 1) - roi(i, 0);
      const double h = std::max(cfg.fd_step * width, 1e-12);
      Vector up = res.best, down = res.best;
      up[i] = std::min(up[i] + h, roi(i, 1));
      down[i] = std::max(down[i] - h, roi(i, 0));
      const double span = up[i] - down[i];
      const Vector ru = residuals(up);
      const Vector rd = residuals(down);
      res.evaluations += 2;
      if (span <= 0.0 || ru.size() != m || rd.size() != m ||
          !ru.allFinite() || !rd.allFinite()) {
        J.col(i).setZero();
      } else {
        J.col(i) = (ru - rd) / span;
      }
    }

    const Matrix jtj = J.transpose() * J;
    const Vector jtr = J.transpose() * r;
    if (jtr.cwiseAbs().maxCoeff() == 0.0) break;

    bool accepted = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Matrix damped = jtj;
      const double floor = 1e-14 * jtj.diagonal().maxCoeff() + 1e-300;
      for (int i = 0; i < n; ++i) {
        damped(i, i) += lambda * std::max(jtj(i, i), floor);
      }
      const Vector step = damped.ldlt().solve(-jtr);
      const Vector cand = clip(res.best + step);
      const Vector rc = residuals(cand);
      ++res.evaluations;
      const double vc = value(rc);
      if (vc < res.best_value) {
        const double rel_gain =
            (res.best_value - vc) / std::max(res.best_value, 1e-300);
        res.best = cand;
        res.best_value = vc;
        r = rc;
        lambda = std::max(lambda / 3.0, 1e-14);
        accepted = true;
        small_gains = rel_gain < cfg.f_tol ? small_gains + 1 : 0;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted || small_gains >= 3) break;
  }
  return res;
}

}  // namespace simap
