#include "simap/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"
#include "simap/io_util.hpp"
#include "simap/model_constants.hpp"
#include "simap/parallel.hpp"

namespace simap {

using nlohmann::json;

std::vector<int> default_train_sizes(const ModelDefinition& model) {
  std::vector<int> sizes;
  for (int s : constants::kTrainSizeLadder) {
    if (s <= model.classes.n_train) sizes.push_back(s);
  }
  if (sizes.empty()) sizes.push_back(model.classes.n_train);
  return sizes;
}

HyperGrid shrink_hyper_grid(const HyperGrid& grid, double scale) {
  auto pick = [&](const std::vector<double>& v) {
    const int len = static_cast<int>(v.size());
    int k = std::clamp(static_cast<int>(std::lround(len * scale)), 1, len);
    std::vector<double> out;
    if (k == 1) {
      out.push_back(v[len / 2]);
      return out;
    }
    for (int i = 0; i < k; ++i) {
      const int idx =
          static_cast<int>(std::lround(static_cast<double>(i) * (len - 1) / (k - 1)));
      if (out.empty() || v[idx] != out.back()) out.push_back(v[idx]);
    }
    return out;
  };
  HyperGrid g = grid;
  if (scale < 1.0) {
    g.c_values = pick(grid.c_values);
    g.scale_factors = pick(grid.scale_factors);
  }
  return g;
}

CurvePoint aggregate(const std::vector<double>& errors,
                     const std::vector<double>& rel_svs, double x) {
  CurvePoint pt;
  pt.x = x;
  pt.trials_ok = static_cast<int>(errors.size());
  if (errors.empty()) {
    pt.valid = false;
    return pt;
  }
  auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = 0.0;
    for (double e : v) mean += e;
    mean /= static_cast<double>(v.size());
    sd = 0.0;
    const bool all_equal =
        std::all_of(v.begin(), v.end(), [&](double e) { return e == v[0]; });
    if (v.size() > 1 && !all_equal) {
      double ss = 0.0;
      for (double e : v) ss += (e - mean) * (e - mean);
      sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    if (all_equal) mean = v[0];
  };
  mean_std(errors, pt.mean_error, pt.std_error);
  mean_std(rel_svs, pt.mean_rel_sv, pt.std_rel_sv);
  pt.valid = true;
  pt.degenerate_std = errors.size() == 1;
  return pt;
}

NoiseSweepSummary noise_sweep_summary(const LearningCurve& po,
                                      const LearningCurve& po_sim) {
  if (po.points.size() != po_sim.points.size() || po.points.empty()) {
    throw std::invalid_argument("noise_sweep_summary: mismatched curves");
  }
  NoiseSweepSummary s;
  s.delta_eps_star = -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (std::size_t i = 0; i < po.points.size(); ++i) {
    const double diff = po.points[i].mean_error - po_sim.points[i].mean_error;
    acc += diff;
    if (diff > s.delta_eps_star) {
      s.delta_eps_star = diff;
      s.sigma_star = po.points[i].x;
    }
  }
  s.mean_delta_eps = acc / static_cast<double>(po.points.size());
  return s;
}

// ---- pool featurization ------------------------------------------------------

namespace {

// rng stream tags
constexpr std::uint64_t kDataStream = 0xD0;
constexpr std::uint64_t kMapStream = 0xA0;
constexpr std::uint64_t kTrialStream = 0xE0;

struct ArmView {
  std::string name;
  const FeatureMatrix* train = nullptr;
  const FeatureMatrix* test = nullptr;
};

std::set<std::size_t> to_set(const std::vector<std::size_t>& v) {
  return {v.begin(), v.end()};
}

std::vector<std::size_t> merged(const std::set<std::size_t>& a,
                                const std::set<std::size_t>& b) {
  std::set<std::size_t> u = a;
  u.insert(b.begin(), b.end());
  return {u.begin(), u.end()};
}

std::vector<int> to_svm_labels(const std::vector<int>& labels) {
  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == 0 ? -1 : 1;
  return y;
}

struct CurveRunner {
  const ModelDefinition& model;
  const HarnessConfig& cfg;
  HyperGrid grid;
  int n_trials;

  // Runs all (size, trial, arm) cells; records keyed by index so parallel
  // execution is deterministic.
  void run(const std::vector<ArmView>& arms, const std::vector<int>& sizes,
           GridKind grid_kind, double sigma, const Rng& trial_root,
           std::vector<TrialRecord>& raw, std::vector<LearningCurve>& curves) {
    const std::size_t cells = sizes.size() * static_cast<std::size_t>(n_trials);
    std::vector<std::vector<TrialRecord>> recs(cells);

    parallel_for(cells, cfg.threads, [&](std::size_t cell) {
      const std::size_t si = cell / n_trials;
      const int trial = static_cast<int>(cell % n_trials);
      const int n_per_class = sizes[si];
      Rng trial_rng = trial_root.split(cell);

      // balanced subsample of feature rows, shared across arms
      const std::vector<int>& labels = arms[0].train->labels;
      std::vector<int> class_rows[2];
      for (std::size_t r = 0; r < labels.size(); ++r) {
        class_rows[labels[r]].push_back(static_cast<int>(r));
      }
      Rng pick_rng = trial_rng.split(0);
      // equal counts per class even if drops shrank one side of the pool
      const int take = std::min<int>(
          n_per_class, static_cast<int>(std::min(class_rows[0].size(),
                                                 class_rows[1].size())));
      std::vector<int> chosen;
      for (auto& rows : class_rows) {
        pick_rng.shuffle(rows);
        chosen.insert(chosen.end(), rows.begin(), rows.begin() + take);
      }
      std::sort(chosen.begin(), chosen.end());

      for (std::size_t ai = 0; ai < arms.size(); ++ai) {
        const ArmView& arm = arms[ai];
        TrialRecord rec;
        rec.model = model.name;
        rec.condition = arm.name;
        rec.grid = grid_kind;
        rec.sigma = sigma;
        rec.n_train = n_per_class;
        rec.trial = trial;
        try {
          Matrix X(chosen.size(), arm.train->rows.cols());
          std::vector<int> y(chosen.size());
          for (std::size_t k = 0; k < chosen.size(); ++k) {
            X.row(static_cast<Eigen::Index>(k)) = arm.train->rows.row(chosen[k]);
            y[k] = arm.train->labels[static_cast<std::size_t>(chosen[k])] == 0
                       ? -1
                       : 1;
          }
          Rng cv_rng = trial_rng.split(1 + ai);
          const CvChoice cv = cv_grid_search(X, y, grid, cv_rng, cfg.smo);
          const TrainedSvm svm = smo_train(X, y, cv.box, cv.scale, cfg.smo);
          const EvalResult ev =
              evaluate(svm, arm.test->rows, to_svm_labels(arm.test->labels));
          rec.error = ev.generalization_error;
          rec.rel_sv = ev.relative_sv_count;
          rec.ok = true;
        } catch (const std::exception&) {
          rec.ok = false;
        }
        recs[cell].push_back(std::move(rec));
      }
    });

    for (auto& group : recs) {
      for (auto& r : group) raw.push_back(std::move(r));
    }

    for (std::size_t ai = 0; ai < arms.size(); ++ai) {
      LearningCurve curve;
      curve.condition = arms[ai].name;
      curve.grid = grid_kind;
      curve.sigma = sigma;
      for (std::size_t si = 0; si < sizes.size(); ++si) {
        std::vector<double> errs, svs;
        for (int t = 0; t < n_trials; ++t) {
          const auto& r = recs[si * n_trials + t][ai];
          if (r.ok) {
            errs.push_back(r.error);
            svs.push_back(r.rel_sv);
          }
        }
        CurvePoint pt = aggregate(errs, svs, sizes[si]);
        if (pt.trials_ok * 2 < n_trials) pt.valid = false;
        curve.points.push_back(pt);
      }
      curves.push_back(std::move(curve));
    }
  }
};

}  // namespace

// ---- experiment 1 ------------------------------------------------------------

ExperimentResult run_experiment1(const ModelDefinition& model,
                                 const HarnessConfig& cfg) {
  ExperimentResult res;
  res.experiment = 1;
  res.model = model.name;
  res.seed = cfg.seed;
  res.scale = cfg.scale;

  const bool has_fo = model.name != "toy";
  const int n_train = model.classes.n_train;
  const int n_test = std::max(
      1, static_cast<int>(std::lround(model.classes.n_test * cfg.scale)));
  const int n_trials = std::max(
      1, static_cast<int>(std::lround(constants::kExp1Trials * cfg.scale)));

  Rng root(cfg.seed);
  Rng data_rng = root.split(kDataStream);
  const TimeGridSpec dense{GridKind::kDense, model.dense_grid,
                           constants::kSparseFraction};

  Rng train_data = data_rng.split(0);
  Rng test_data = data_rng.split(1);
  const Dataset fo_train = generate_dataset(model, dense, NoiseSpec::full(model),
                                            n_train, train_data);
  const Dataset fo_test = generate_dataset(model, dense, NoiseSpec::full(model),
                                           n_test, test_data);
  const Dataset po_train = project_to_partial(fo_train, model.noise_po);
  const Dataset po_test = project_to_partial(fo_test, model.noise_po);

  Rng map_rng = root.split(kMapStream);
  std::vector<std::size_t> fail_fo_tr, fail_fo_te, fail_po_tr, fail_po_te;
  std::vector<MapResult> maps_fo_tr, maps_fo_te;
  if (has_fo) {
    maps_fo_tr = map_dataset(fo_train, model, NoiseSpec::full(model),
                             cfg.optimizer, map_rng.split(0), cfg.threads,
                             &fail_fo_tr);
    maps_fo_te = map_dataset(fo_test, model, NoiseSpec::full(model),
                             cfg.optimizer, map_rng.split(1), cfg.threads,
                             &fail_fo_te);
  }
  const auto maps_po_tr =
      map_dataset(po_train, model, NoiseSpec::partial(model), cfg.optimizer,
                  map_rng.split(2), cfg.threads, &fail_po_tr);
  const auto maps_po_te =
      map_dataset(po_test, model, NoiseSpec::partial(model), cfg.optimizer,
                  map_rng.split(3), cfg.threads, &fail_po_te);

  const auto drop_tr = merged(to_set(fail_fo_tr), to_set(fail_po_tr));
  const auto drop_te = merged(to_set(fail_fo_te), to_set(fail_po_te));

  FeatureMatrix fo_tr_theta, fo_te_theta;
  if (has_fo) {
    fo_tr_theta = features_from_maps(maps_fo_tr, fo_train.labels(), drop_tr,
                                model.name, FeatureMode::kTheta);
    fo_te_theta = features_from_maps(maps_fo_te, fo_test.labels(), drop_te,
                                model.name, FeatureMode::kTheta);
  }
  const FeatureMatrix po_tr_theta = features_from_maps(
      maps_po_tr, po_train.labels(), drop_tr, model.name, FeatureMode::kTheta);
  const FeatureMatrix po_te_theta = features_from_maps(
      maps_po_te, po_test.labels(), drop_te, model.name, FeatureMode::kTheta);
  const FeatureMatrix po_tr_phi = features_from_maps(
      maps_po_tr, po_train.labels(), drop_tr, model.name, FeatureMode::kPhi);
  const FeatureMatrix po_te_phi = features_from_maps(
      maps_po_te, po_test.labels(), drop_te, model.name, FeatureMode::kPhi);

  std::vector<ArmView> arms;
  if (has_fo) arms.push_back({"FO", &fo_tr_theta, &fo_te_theta});
  arms.push_back({"PO", &po_tr_theta, &po_te_theta});
  arms.push_back({"PO+SIM", &po_tr_phi, &po_te_phi});

  const std::vector<int> sizes =
      cfg.train_sizes.empty() ? default_train_sizes(model) : cfg.train_sizes;

  CurveRunner runner{model, cfg, shrink_hyper_grid(cfg.hyper, cfg.scale),
                     n_trials};
  runner.run(arms, sizes, GridKind::kDense, std::sqrt(model.noise_po),
             root.split(kTrialStream), res.raw, res.curves);
  return res;
}

// ---- experiment 2 ------------------------------------------------------------

ExperimentResult run_experiment2(const ModelDefinition& model,
                                 const HarnessConfig& cfg) {
  ExperimentResult res;
  res.experiment = 2;
  res.model = model.name;
  res.seed = cfg.seed;
  res.scale = cfg.scale;

  const int n_train = model.classes.n_train;
  const int n_test = std::max(
      1, static_cast<int>(std::lround(model.classes.n_test * cfg.scale)));
  const int n_trials = std::max(
      1, static_cast<int>(std::lround(constants::kExp2Trials * cfg.scale)));
  const std::vector<int> sizes = {cfg.exp2_train_per_class};

  Rng root(cfg.seed);
  const TimeGridSpec dense{GridKind::kDense, model.dense_grid,
                           constants::kSparseFraction};

  LearningCurve po_curve{"PO", GridKind::kDense, 0.0, {}};
  LearningCurve sim_curve{"PO+SIM", GridKind::kDense, 0.0, {}};

  for (int k = 0; k < model.sigma_range.size(); ++k) {
    const double sigma = model.sigma_range[k];
    const NoiseSpec noise = NoiseSpec::partial_sigma(sigma);
    Rng sweep = root.split(0x100 + static_cast<std::uint64_t>(k));

    Rng train_data = sweep.split(0);
    Rng test_data = sweep.split(1);
    const Dataset train = generate_dataset(model, dense, noise, n_train, train_data);
    const Dataset test = generate_dataset(model, dense, noise, n_test, test_data);

    std::vector<std::size_t> fail_tr, fail_te;
    const auto maps_tr = map_dataset(train, model, noise, cfg.optimizer,
                                     sweep.split(2), cfg.threads, &fail_tr);
    const auto maps_te = map_dataset(test, model, noise, cfg.optimizer,
                                     sweep.split(3), cfg.threads, &fail_te);

    const FeatureMatrix tr_theta = features_from_maps(
        maps_tr, train.labels(), fail_tr, model.name, FeatureMode::kTheta);
    const FeatureMatrix te_theta = features_from_maps(
        maps_te, test.labels(), fail_te, model.name, FeatureMode::kTheta);
    const FeatureMatrix tr_phi = features_from_maps(
        maps_tr, train.labels(), fail_tr, model.name, FeatureMode::kPhi);
    const FeatureMatrix te_phi = features_from_maps(
        maps_te, test.labels(), fail_te, model.name, FeatureMode::kPhi);

    std::vector<ArmView> arms = {{"PO", &tr_theta, &te_theta},
                                 {"PO+SIM", &tr_phi, &te_phi}};

    std::vector<LearningCurve> curves;
    CurveRunner runner{model, cfg, shrink_hyper_grid(cfg.hyper, cfg.scale),
                       n_trials};
    runner.run(arms, sizes, GridKind::kDense, sigma, sweep.split(4), res.raw,
               curves);
    for (const auto& c : curves) {
      CurvePoint pt = c.points.at(0);
      pt.x = sigma;
      (c.condition == "PO" ? po_curve : sim_curve).points.push_back(pt);
    }
  }

  res.curves.push_back(po_curve);
  res.curves.push_back(sim_curve);
  res.summary = noise_sweep_summary(po_curve, sim_curve);
  return res;
}

// ---- experiment 3 ------------------------------------------------------------

ExperimentResult run_experiment3(const ModelDefinition& model,
                                 const HarnessConfig& cfg) {
  ExperimentResult res;
  res.experiment = 3;
  res.model = model.name;
  res.seed = cfg.seed;
  res.scale = cfg.scale;

  const int n_train = model.classes.n_train;
  const int n_test = std::max(
      1, static_cast<int>(std::lround(model.classes.n_test * cfg.scale)));
  const int n_trials = std::max(
      1, static_cast<int>(std::lround(constants::kExp3Trials * cfg.scale)));
  const std::vector<int> sizes =
      cfg.train_sizes.empty() ? default_train_sizes(model) : cfg.train_sizes;
  const double sigma = model.exp3_sigma;
  const NoiseSpec noise = NoiseSpec::partial_sigma(sigma);

  Rng root(cfg.seed);
  const GridKind kinds[3] = {GridKind::kDense, GridKind::kSparse,
                             GridKind::kIrregular};

  for (int g = 0; g < 3; ++g) {
    const TimeGridSpec spec{kinds[g], model.dense_grid,
                            constants::kSparseFraction};
    Rng branch = root.split(0x200 + static_cast<std::uint64_t>(g));

    Rng train_data = branch.split(0);
    Rng test_data = branch.split(1);
    const Dataset train = generate_dataset(model, spec, noise, n_train, train_data);
    const Dataset test = generate_dataset(model, spec, noise, n_test, test_data);

    std::vector<std::size_t> fail_tr, fail_te;
    const auto maps_tr = map_dataset(train, model, noise, cfg.optimizer,
                                     branch.split(2), cfg.threads, &fail_tr);
    const auto maps_te = map_dataset(test, model, noise, cfg.optimizer,
                                     branch.split(3), cfg.threads, &fail_te);

    const FeatureMatrix tr_theta = features_from_maps(
        maps_tr, train.labels(), fail_tr, model.name, FeatureMode::kTheta);
    const FeatureMatrix te_theta = features_from_maps(
        maps_te, test.labels(), fail_te, model.name, FeatureMode::kTheta);
    const FeatureMatrix tr_phi = features_from_maps(
        maps_tr, train.labels(), fail_tr, model.name, FeatureMode::kPhi);
    const FeatureMatrix te_phi = features_from_maps(
        maps_te, test.labels(), fail_te, model.name, FeatureMode::kPhi);

    std::vector<ArmView> arms = {{"PO", &tr_theta, &te_theta},
                                 {"PO+SIM", &tr_phi, &te_phi}};

    CurveRunner runner{model, cfg, shrink_hyper_grid(cfg.hyper, cfg.scale),
                       n_trials};
    runner.run(arms, sizes, kinds[g], sigma, branch.split(4), res.raw,
               res.curves);
  }
  return res;
}

// ---- structural-identifiability verification ---------------------------------

SiModelReport verify_si(const ModelDefinition& model, int n_pairs,
                        double output_tol, std::uint64_t seed) {
  SiModelReport rep;
  rep.model = model.name;
  rep.pairs = n_pairs;
  rep.output_tol = output_tol;
  rep.sim_tol = 1e-10;
  rep.laplace_tol = 1e-9;

  Rng root(seed);
  const int n = model.param_dim();

  for (int p = 0; p < n_pairs; ++p) {
    Rng pair_rng = root.split(static_cast<std::uint64_t>(p));

    // ROI-uniform theta, rejecting draws whose trajectories do not evaluate
    Vector theta(n);
    Trajectory base;
    bool have = false;
    for (int attempt = 0; attempt < 200 && !have; ++attempt) {
      for (int i = 0; i < n; ++i) {
        theta[i] = pair_rng.uniform(model.roi(i, 0), model.roi(i, 1));
      }
      try {
        base = integrate(model.system, theta, model.dense_grid, 1e-8, 1e-10,
                         ObservationMode::kPartial);
        if (base.outputs.allFinite()) have = true;
      } catch (const IntegrationError&) {
      } catch (const std::domain_error&) {
      }
    }
    if (!have) {
      throw std::runtime_error("verify_si: could not sample a valid theta");
    }

    const double mag = 0.05 + 0.25 * pair_rng.uniform01();
    const double alpha = pair_rng.uniform01() < 0.5 ? 1.0 + mag : 1.0 / (1.0 + mag);
    const Vector theta2 = gauge_transform(model, theta, alpha, pair_rng);

    const Trajectory other = integrate(model.system, theta2, model.dense_grid,
                                       1e-8, 1e-10, ObservationMode::kPartial);
    rep.max_output_dev =
        std::max(rep.max_output_dev,
                 (base.outputs - other.outputs).cwiseAbs().maxCoeff());
    rep.max_sim_dev = std::max(
        rep.max_sim_dev,
        (model.sim_map(theta) - model.sim_map(theta2)).cwiseAbs().maxCoeff());

    if (model.name == "cml") {
      const Vector l1 = sim_cml_laplace(theta);
      const Vector l2 = sim_cml_laplace(theta2);
      for (int i = 0; i < l1.size(); ++i) {
        const double denom = std::max(std::abs(l1[i]), 1e-30);
        rep.max_laplace_rel_dev =
            std::max(rep.max_laplace_rel_dev, std::abs(l1[i] - l2[i]) / denom);
      }
    }
  }

  rep.pass = rep.max_output_dev <= rep.output_tol &&
             rep.max_sim_dev <= rep.sim_tol &&
             (model.name != "cml" || rep.max_laplace_rel_dev <= rep.laplace_tol);
  return rep;
}

// ---- results files ------------------------------------------------------------

namespace {
constexpr const char* kResultsMagic = "# simap results v1";
constexpr const char* kAggMagic = "# simap results-agg v1";
}  // namespace

std::string render_results(const ExperimentResult& res) {
  std::ostringstream out;
  out << kResultsMagic << "\n";
  json header;
  header["format"] = "simap.results";
  header["version"] = 1;
  header["experiment"] = res.experiment;
  header["model"] = res.model;
  header["seed"] = res.seed;
  header["scale"] = res.scale;
  header["n_rows"] = res.raw.size();
  out << header.dump() << "\n";
  out << "model\tcondition\tgrid\tsigma\tn_train\ttrial\terror\trel_sv\tok\n";
  for (const auto& r : res.raw) {
    out << r.model << '\t' << r.condition << '\t' << to_string(r.grid) << '\t'
        << fmt_double(r.sigma) << '\t' << r.n_train << '\t' << r.trial << '\t'
        << fmt_double(r.error) << '\t' << fmt_double(r.rel_sv) << '\t'
        << (r.ok ? 1 : 0) << "\n";
  }
  return out.str();
}

std::string render_aggregates(const ExperimentResult& res) {
  std::ostringstream out;
  out << kAggMagic << "\n";
  json header;
  header["format"] = "simap.results_agg";
  header["version"] = 1;
  header["experiment"] = res.experiment;
  header["model"] = res.model;
  header["seed"] = res.seed;
  header["scale"] = res.scale;
  out << header.dump() << "\n";
  out << "model\tcondition\tgrid\tsigma\tx\ttrials_ok\tmean_error\tstd_error"
         "\tmean_rel_sv\tstd_rel_sv\tvalid\n";
  for (const auto& c : res.curves) {
    for (const auto& pt : c.points) {
      out << res.model << '\t' << c.condition << '\t' << to_string(c.grid)
          << '\t' << fmt_double(c.sigma) << '\t' << fmt_double(pt.x) << '\t'
          << pt.trials_ok << '\t' << fmt_double(pt.mean_error) << '\t'
          << fmt_double(pt.std_error) << '\t' << fmt_double(pt.mean_rel_sv)
          << '\t' << fmt_double(pt.std_rel_sv) << '\t' << (pt.valid ? 1 : 0)
          << "\n";
    }
  }
  if (res.summary) {
    out << "# sweep summary: sigma_star=" << fmt_double(res.summary->sigma_star)
        << " delta_eps_star=" << fmt_double(res.summary->delta_eps_star)
        << " mean_delta_eps=" << fmt_double(res.summary->mean_delta_eps)
        << "\n";
  }
  return out.str();
}

void save_results(const std::filesystem::path& path,
                  const ExperimentResult& res) {
  atomic_write(path, render_results(res));
}

void save_aggregates(const std::filesystem::path& path,
                     const ExperimentResult& res) {
  atomic_write(path, render_aggregates(res));
}

void rebuild_curves(ExperimentResult& res) {
  res.curves.clear();
  res.summary.reset();

  // group rows by (condition, grid), preserving first-seen order
  struct Key {
    std::string condition;
    GridKind grid;
    bool operator==(const Key& o) const {
      return condition == o.condition && grid == o.grid;
    }
  };
  std::vector<Key> keys;
  std::vector<std::vector<const TrialRecord*>> groups;
  for (const auto& r : res.raw) {
    const Key key{r.condition, r.grid};
    std::size_t gi = 0;
    for (; gi < keys.size(); ++gi) {
      if (keys[gi] == key) break;
    }
    if (gi == keys.size()) {
      keys.push_back(key);
      groups.emplace_back();
    }
    groups[gi].push_back(&r);
  }

  const bool sweep = res.experiment == 2;
  for (std::size_t gi = 0; gi < keys.size(); ++gi) {
    LearningCurve curve;
    curve.condition = keys[gi].condition;
    curve.grid = keys[gi].grid;
    curve.sigma = sweep ? 0.0 : (groups[gi].empty() ? 0.0 : groups[gi][0]->sigma);

    // x values in first-seen order
    std::vector<double> xs;
    for (const auto* r : groups[gi]) {
      const double x = sweep ? r->sigma : r->n_train;
      if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
    }
    int n_trials = 0;
    for (double x : xs) {
      std::vector<double> errs, svs;
      int seen = 0;
      for (const auto* r : groups[gi]) {
        const double rx = sweep ? r->sigma : r->n_train;
        if (rx != x) continue;
        ++seen;
        if (r->ok) {
          errs.push_back(r->error);
          svs.push_back(r->rel_sv);
        }
      }
      n_trials = std::max(n_trials, seen);
      CurvePoint pt = aggregate(errs, svs, x);
      if (pt.trials_ok * 2 < seen) pt.valid = false;
      curve.points.push_back(pt);
    }
    res.curves.push_back(std::move(curve));
  }

  if (sweep) {
    const LearningCurve* po = nullptr;
    const LearningCurve* po_sim = nullptr;
    for (const auto& c : res.curves) {
      if (c.condition == "PO") po = &c;
      if (c.condition == "PO+SIM") po_sim = &c;
    }
    if (po && po_sim) res.summary = noise_sweep_summary(*po, *po_sim);
  }
}

ExperimentResult load_results(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  };
  if (!next_line() || line != kResultsMagic) {
    throw ParseError("missing results magic header", line_no);
  }
  if (!next_line()) throw ParseError("missing JSON header", line_no);
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "simap.results") {
    throw ParseError("bad results JSON header", line_no);
  }
  ExperimentResult res;
  res.experiment = header.at("experiment").get<int>();
  res.model = header.at("model").get<std::string>();
  res.seed = header.value("seed", 0ull);
  res.scale = header.value("scale", 1.0);
  if (!next_line()) throw ParseError("missing column header", line_no);

  while (next_line()) {
    if (line.empty() || line[0] == '#') continue;
    const auto toks = split_char(line, '\t');
    if (toks.size() != 9) throw ParseError("expected 9 columns", line_no);
    TrialRecord r;
    r.model = toks[0];
    r.condition = toks[1];
    r.grid = grid_kind_from_string(toks[2]);
    r.sigma = parse_double(toks[3], line_no);
    r.n_train = static_cast<int>(parse_long(toks[4], line_no));
    r.trial = static_cast<int>(parse_long(toks[5], line_no));
    r.error = parse_double(toks[6], line_no);
    r.rel_sv = parse_double(toks[7], line_no);
    r.ok = parse_long(toks[8], line_no) != 0;
    res.raw.push_back(std::move(r));
  }
  rebuild_curves(res);
  return res;
}

}  // namespace simap
