#include "simap/map_inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "simap/io_util.hpp"
#include "simap/parallel.hpp"

namespace simap {

using nlohmann::json;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
}  // namespace

double log_likelihood(const Vector& theta, const LabeledSeries& series,
                      const NoiseSpec& noise, const ModelDefinition& model,
                      double rel_tol, double abs_tol) {
  Trajectory traj;
  try {
    traj = integrate(model.system, theta, series.times, rel_tol, abs_tol,
                     noise.mode);
  } catch (const IntegrationError&) {
    return -kInf;
  } catch (const std::domain_error&) {
    return -kInf;
  }
  const int L = static_cast<int>(series.times.size());
  const int r = noise.dim();
  if (series.outputs.cols() != r) {
    throw std::invalid_argument("log_likelihood: observation dim mismatch");
  }
  double ll = 0.0;
  for (int j = 0; j < r; ++j) {
    const double var = noise.variance(j);
    if (!(var > 0.0)) {
      throw std::invalid_argument("log_likelihood: noise variance must be > 0");
    }
    const double log_norm = -0.5 * (kLog2Pi + std::log(var));
    for (int i = 0; i < L; ++i) {
      const double resid = series.outputs(i, j) - traj.outputs(i, j);
      ll += log_norm - 0.5 * resid * resid / var;
    }
  }
  return std::isfinite(ll) ? ll : -kInf;
}

Vector scaled_residuals(const Vector& theta, const LabeledSeries& series,
                        const NoiseSpec& noise, const ModelDefinition& model,
                        double rel_tol, double abs_tol) {
  Trajectory traj;
  try {
    traj = integrate(model.system, theta, series.times, rel_tol, abs_tol,
                     noise.mode);
  } catch (const IntegrationError&) {
    return Vector();
  } catch (const std::domain_error&) {
    return Vector();
  }
  const int L = static_cast<int>(series.times.size());
  const int r = noise.dim();
  Vector out(L * r);
  for (int j = 0; j < r; ++j) {
    const double inv_sigma = 1.0 / std::sqrt(noise.variance(j));
    for (int i = 0; i < L; ++i) {
      out[j * L + i] =
          (series.outputs(i, j) - traj.outputs(i, j)) * inv_sigma;
    }
  }
  return out;
}

MapResult map_estimate(const LabeledSeries& series,
                       const ModelDefinition& model, const NoiseSpec& noise,
                       const OptimizerConfig& cfg, Rng& rng) {
  if (series.times.size() == 0) {
    throw std::invalid_argument("map_estimate: empty series");
  }
  auto nll = [&](const Vector& theta) {
    const double ll =
        log_likelihood(theta, series, noise, model, cfg.rel_tol, cfg.abs_tol);
    return ll == -kInf ? kInf : -ll;
  };

  const AnnealResult sa = simulated_annealing(nll, model.roi, cfg.anneal, rng);
  if (!sa.any_finite) {
    throw EstimationError(
        "map_estimate: evaluation budget exhausted without a finite objective");
  }
  const NelderMeadResult nm = nelder_mead_box(nll, model.roi, sa.best, cfg.polish);
  Vector best = nm.best_value <= sa.best_value ? nm.best : sa.best;
  double best_nll = std::min(nm.best_value, sa.best_value);

  // simplex search stalls on the ridge in higher dimensions; a damped
  // Gauss-Newton pass on the residual stack finishes the job
  const std::size_t expected =
      series.times.size() * static_cast<std::size_t>(noise.dim());
  auto residual_fn = [&](const Vector& theta) {
    Vector r = scaled_residuals(theta, series, noise, model, cfg.lm_rel_tol,
                                cfg.lm_abs_tol);
    if (r.size() == 0) {
      return Vector::Constant(static_cast<Eigen::Index>(expected), 1e30).eval();
    }
    return r;
  };
  const LmResult lm =
      levenberg_marquardt_box(residual_fn, model.roi, best, cfg.lm);
  long lm_evals = lm.evaluations;
  {
    const double lm_nll = nll(lm.best);
    ++lm_evals;
    if (lm_nll < best_nll) {
      best = lm.best;
      best_nll = lm_nll;
    }
  }

  MapResult res;
  res.theta_map = best;
  res.log_likelihood = -best_nll;
  res.evaluations = sa.evaluations + nm.evaluations + lm_evals;
  res.converged = sa.probe_spread >= cfg.flat_objective_tol;
  res.phi = model.sim_map(res.theta_map);
  return res;
}

Vector apply_sim(const Vector& theta, const ModelDefinition& model) {
  return model.sim_map(theta);
}

std::string to_string(FeatureMode mode) {
  return mode == FeatureMode::kTheta ? "theta" : "phi";
}

FeatureMode feature_mode_from_string(const std::string& s) {
  if (s == "theta") return FeatureMode::kTheta;
  if (s == "phi") return FeatureMode::kPhi;
  throw std::invalid_argument("unknown feature mode '" + s + "'");
}

std::vector<MapResult> map_dataset(const Dataset& ds,
                                   const ModelDefinition& model,
                                   const NoiseSpec& noise,
                                   const OptimizerConfig& cfg, const Rng& rng,
                                   int threads,
                                   std::vector<std::size_t>* failures) {
  const std::size_t n = ds.series.size();
  std::vector<MapResult> maps(n);
  std::vector<char> failed(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    Rng series_rng = rng.split(i);
    try {
      maps[i] = map_estimate(ds.series[i], model, noise, cfg, series_rng);
    } catch (const EstimationError&) {
      failed[i] = 1;
    }
  });
  if (failures) {
    failures->clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (failed[i]) failures->push_back(i);
    }
  }
  return maps;
}

FeatureMatrix features_from_maps(const std::vector<MapResult>& maps,
                                 const std::vector<int>& labels,
                                 const std::vector<std::size_t>& failures,
                                 const std::string& model_name,
                                 FeatureMode mode) {
  FeatureMatrix fm;
  fm.model = model_name;
  fm.mode = mode;
  fm.dropped = static_cast<int>(failures.size());

  std::vector<char> is_failed(maps.size(), 0);
  for (auto i : failures) is_failed[i] = 1;

  const std::size_t kept = maps.size() - failures.size();
  long evals = 0;
  int dim = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (!is_failed[i]) {
      dim = static_cast<int>(mode == FeatureMode::kTheta
                                 ? maps[i].theta_map.size()
                                 : maps[i].phi.size());
      break;
    }
  }
  fm.rows.resize(static_cast<Eigen::Index>(kept), dim);
  fm.labels.reserve(kept);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (is_failed[i]) continue;
    const Vector& v =
        mode == FeatureMode::kTheta ? maps[i].theta_map : maps[i].phi;
    fm.rows.row(row++) = v.transpose();
    fm.labels.push_back(labels[i]);
    evals += maps[i].evaluations;
  }
  fm.mean_evaluations = kept ? static_cast<double>(evals) / kept : 0.0;
  return fm;
}

FeatureMatrix dataset_to_features(const Dataset& ds,
                                  const ModelDefinition& model,
                                  const NoiseSpec& noise, FeatureMode mode,
                                  const OptimizerConfig& cfg, Rng& rng,
                                  int threads) {
  if (ds.series.empty()) {
    throw std::invalid_argument("dataset_to_features: empty dataset");
  }
  std::vector<std::size_t> failures;
  const auto maps = map_dataset(ds, model, noise, cfg, rng, threads, &failures);
  return features_from_maps(maps, ds.labels(), failures, model.name, mode);
}

// ---- serialization ----------------------------------------------------------

namespace {
constexpr const char* kFeaturesMagic = "# simap features v1";
}

void save_features(const std::filesystem::path& path, const FeatureMatrix& fm) {
  std::ostringstream out;
  out << kFeaturesMagic << "\n";
  json header;
  header["format"] = "simap.features";
  header["version"] = 1;
  header["model"] = fm.model;
  header["mode"] = to_string(fm.mode);
  header["dim"] = fm.rows.cols();
  header["n_rows"] = fm.rows.rows();
  header["dropped"] = fm.dropped;
  header["mean_evaluations"] = fm.mean_evaluations;
  out << header.dump() << "\n";
  for (Eigen::Index i = 0; i < fm.rows.rows(); ++i) {
    out << fm.labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < fm.rows.cols(); ++j) {
      out << '\t' << fmt_double(fm.rows(i, j));
    }
    out << "\n";
  }
  atomic_write(path, out.str());
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  };
  if (!next_line() || line != kFeaturesMagic) {
    throw ParseError("missing features magic header", line_no);
  }
  if (!next_line()) throw ParseError("missing JSON header", line_no);
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "simap.features") {
    throw ParseError("bad JSON header", line_no);
  }
  FeatureMatrix fm;
  fm.model = header.at("model").get<std::string>();
  fm.mode = feature_mode_from_string(header.at("mode").get<std::string>());
  fm.dropped = header.value("dropped", 0);
  fm.mean_evaluations = header.value("mean_evaluations", 0.0);
  const Eigen::Index dim = header.at("dim").get<Eigen::Index>();
  const Eigen::Index n_rows = header.at("n_rows").get<Eigen::Index>();
  fm.rows.resize(n_rows, dim);
  for (Eigen::Index i = 0; i < n_rows; ++i) {
    if (!next_line()) throw ParseError("unexpected end of file", line_no);
    auto toks = split_char(line, '\t');
    if (static_cast<Eigen::Index>(toks.size()) != dim + 1) {
      throw ParseError("expected " + std::to_string(dim + 1) + " columns",
                       line_no);
    }
    fm.labels.push_back(static_cast<int>(parse_long(toks[0], line_no)));
    for (Eigen::Index j = 0; j < dim; ++j) {
      fm.rows(i, j) = parse_double(toks[static_cast<std::size_t>(j) + 1], line_no);
    }
  }
  return fm;
}

}  // namespace simap
