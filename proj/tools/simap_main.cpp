// simap command-line tool: dataset synthesis, MAP featurization, SVM
// training, the three benchmark experiments, structural-identifiability
// verification and report/plot emission.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "simap/config.hpp"
#include "simap/dataset.hpp"
#include "simap/io_util.hpp"
#include "simap/map_inference.hpp"
#include "simap/model_constants.hpp"
#include "simap/parallel.hpp"
#include "simap/svg_plot.hpp"
#include "simap/svm.hpp"

namespace fs = std::filesystem;
using namespace simap;

namespace {

struct CliState {
  RunConfig cfg;
  std::string config_file;
  // subcommand-specific
  std::string grid = "dense";
  std::string mode = "partial";
  std::string fit_mode = "both";
  double noise_sigma = -1.0;
  int n_per_class = 0;
  int pairs = 50;
  double tol = 1e-5;
  std::string data_file, features_file, test_features_file, raw_file, out_file;
  std::string exp_models;  // csv or single
};

void persist_config(const fs::path& main_output, const RunConfig& cfg) {
  atomic_write(main_output.string() + ".config", render_config(cfg));
}

int cmd_gen_data(CliState& st) {
  const ModelDefinition model = make_model(st.cfg.model, input_from(st.cfg));
  const GridKind kind = grid_kind_from_string(st.grid);
  const TimeGridSpec spec{kind, model.dense_grid, constants::kSparseFraction};

  NoiseSpec noise;
  if (st.mode == "full") {
    noise = NoiseSpec::full(model);
    if (st.noise_sigma >= 0.0) {
      noise.full_cov_diag =
          Vector::Constant(model.system.state_dim, st.noise_sigma * st.noise_sigma);
    }
  } else if (st.mode == "partial") {
    noise = st.noise_sigma >= 0.0 ? NoiseSpec::partial_sigma(st.noise_sigma)
                                  : NoiseSpec::partial(model);
  } else {
    throw ConfigError("mode must be 'full' or 'partial'");
  }

  const int n = st.n_per_class > 0 ? st.n_per_class : model.classes.n_train;
  Rng rng(st.cfg.seed);
  Dataset ds = generate_dataset(model, spec, noise, n, rng);
  ds.seed = st.cfg.seed;

  fs::path out = st.out_file.empty()
                     ? fs::path(resolve_out_dir(st.cfg)) /
                           (model.name + "_" + st.grid + "_" + st.mode + "_n" +
                            std::to_string(n) + "_s" + std::to_string(st.cfg.seed) +
                            ".dat")
                     : fs::path(st.out_file);
  save_dataset(out, ds);
  persist_config(out, st.cfg);
  std::cout << "wrote " << out.string() << ": " << ds.series.size()
            << " series (" << n << " per class), grid " << st.grid << " ["
            << ds.series.front().times.size() << " points]\n";
  return 0;
}

int cmd_fit_map(CliState& st) {
  const Dataset ds = load_dataset(st.data_file);
  if (ds.series.empty()) throw ConfigError("dataset file has no series");
  const ModelDefinition model = make_model(ds.model, input_from(st.cfg));
  const OptimizerConfig opt = optimizer_from(st.cfg);
  const int threads = st.cfg.threads > 0 ? st.cfg.threads : default_threads();

  std::vector<std::size_t> failures;
  Rng rng(st.cfg.seed);
  const auto maps =
      map_dataset(ds, model, ds.noise, opt, rng.split(0x7157), threads, &failures);

  const fs::path base = fs::path(st.data_file);
  fs::path stem = base.parent_path() / base.stem();
  int rc = 0;
  for (const std::string mode_name : {"theta", "phi"}) {
    if (st.fit_mode != "both" && st.fit_mode != mode_name) continue;
    const FeatureMode mode = feature_mode_from_string(mode_name);
    const FeatureMatrix fm =
        features_from_maps(maps, ds.labels(), failures, model.name, mode);
    const fs::path out = stem.string() + "." + mode_name + ".features";
    save_features(out, fm);
    persist_config(out, st.cfg);
    std::cout << "wrote " << out.string() << ": dim " << fm.rows.cols()
              << ", rows " << fm.rows.rows() << ", dropped " << fm.dropped
              << ", mean evaluations " << fmt_fixed(fm.mean_evaluations, 1)
              << "\n";
  }
  return rc;
}

int cmd_train(CliState& st) {
  const FeatureMatrix fm = load_features(st.features_file);
  std::vector<int> y(fm.labels.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = fm.labels[i] == 0 ? -1 : 1;

  Rng rng(st.cfg.seed);
  const HyperGrid grid = hyper_grid_from(st.cfg);
  const SmoConfig smo = smo_from(st.cfg);
  const CvChoice cv = cv_grid_search(fm.rows, y, grid, rng, smo);
  const TrainedSvm model = smo_train(fm.rows, y, cv.box, cv.scale, smo);

  const fs::path base = fs::path(st.features_file);
  const fs::path out = base.parent_path() / (base.stem().string() + ".svm.json");
  save_svm(out, model);
  persist_config(out, st.cfg);
  std::cout << "wrote " << out.string() << ": C=" << fmt_double(cv.box)
            << " scale=" << fmt_double(cv.scale)
            << " cv_error=" << fmt_double(cv.cv_error) << " sv="
            << model.support_vectors.rows() << "/" << model.n_train << "\n";

  if (!st.test_features_file.empty()) {
    const FeatureMatrix te = load_features(st.test_features_file);
    std::vector<int> yt(te.labels.size());
    for (std::size_t i = 0; i < yt.size(); ++i) yt[i] = te.labels[i] == 0 ? -1 : 1;
    const EvalResult ev = evaluate(model, te.rows, yt);
    std::cout << "test: error=" << fmt_double(ev.generalization_error)
              << " rel_sv=" << fmt_double(ev.relative_sv_count) << "\n";
  }
  return 0;
}

int write_experiment_outputs(const ExperimentResult& res, const RunConfig& cfg) {
  const fs::path dir = resolve_out_dir(cfg);
  const std::string prefix = "exp" + std::to_string(res.experiment) + "_" +
                             res.model + "_s" + std::to_string(res.seed);
  save_results(dir / (prefix + ".raw.tsv"), res);
  save_aggregates(dir / (prefix + ".agg.tsv"), res);
  save_experiment_plot(dir / (prefix + ".svg"), res);
  persist_config(dir / (prefix + ".raw.tsv"), cfg);
  std::cout << "wrote " << (dir / prefix).string() << ".{raw.tsv,agg.tsv,svg}\n";

  if (res.summary) {
    std::cout << res.model << " sweep: delta_eps_star="
              << fmt_fixed(res.summary->delta_eps_star, 4)
              << " at sigma_star=" << fmt_double(res.summary->sigma_star)
              << ", mean_delta_eps=" << fmt_fixed(res.summary->mean_delta_eps, 4)
              << "\n";
  }
  bool any_invalid = false;
  for (const auto& c : res.curves) {
    for (const auto& pt : c.points) {
      if (!pt.valid) any_invalid = true;
    }
  }
  if (any_invalid) {
    std::cerr << "warning: some curve points are invalid (failed trials)\n";
    return 1;
  }
  return 0;
}

int cmd_exp(CliState& st) {
  const ModelDefinition model = make_model(st.cfg.model, input_from(st.cfg));
  const HarnessConfig h = harness_from(st.cfg);
  ExperimentResult res;
  switch (st.cfg.experiment) {
    case 1: res = run_experiment1(model, h); break;
    case 2: res = run_experiment2(model, h); break;
    case 3: res = run_experiment3(model, h); break;
    default: throw ConfigError("experiment id must be 1, 2 or 3");
  }
  return write_experiment_outputs(res, st.cfg);
}

int cmd_verify_si(CliState& st) {
  std::vector<std::string> names;
  if (st.cfg.model == "all") {
    names = model_names();
  } else {
    names.push_back(st.cfg.model);
  }
  bool all_pass = true;
  for (const auto& name : names) {
    const ModelDefinition model = make_model(name, input_from(st.cfg));
    const SiModelReport rep = verify_si(model, st.pairs, st.tol, st.cfg.seed);
    std::cout << (rep.pass ? "PASS" : "FAIL") << " " << name << ": " << rep.pairs
              << " pairs, max output dev " << fmt_double(rep.max_output_dev)
              << " (tol " << fmt_double(rep.output_tol) << "), max sim dev "
              << fmt_double(rep.max_sim_dev) << " (tol "
              << fmt_double(rep.sim_tol) << ")";
    if (name == "cml") {
      std::cout << ", max laplace rel dev " << fmt_double(rep.max_laplace_rel_dev)
                << " (tol " << fmt_double(rep.laplace_tol) << ")";
    }
    std::cout << "\n";
    all_pass = all_pass && rep.pass;
  }
  return all_pass ? 0 : 1;
}

int cmd_report(CliState& st) {
  ExperimentResult res = load_results(st.raw_file);
  const fs::path dir = resolve_out_dir(st.cfg);
  const std::string prefix = "exp" + std::to_string(res.experiment) + "_" +
                             res.model + "_s" + std::to_string(res.seed);
  save_aggregates(dir / (prefix + ".agg.tsv"), res);
  save_experiment_plot(dir / (prefix + ".svg"), res);
  persist_config(dir / (prefix + ".agg.tsv"), st.cfg);
  std::cout << "wrote " << (dir / prefix).string() << ".{agg.tsv,svg}\n";
  if (res.summary) {
    std::cout << res.model << " sweep: delta_eps_star="
              << fmt_fixed(res.summary->delta_eps_star, 4)
              << " at sigma_star=" << fmt_double(res.summary->sigma_star)
              << ", mean_delta_eps=" << fmt_fixed(res.summary->mean_delta_eps, 4)
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CliState st;

  // resolve the config file first so its values become the defaults that
  // command-line flags override
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      st.config_file = argv[i + 1];
    } else if (arg.rfind("--config=", 0) == 0) {
      st.config_file = arg.substr(9);
    }
  }
  if (!st.config_file.empty()) {
    try {
      st.cfg = load_config_file(st.config_file, RunConfig());
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
  }

  CLI::App app{"model-based time-series classification with structural "
               "identifiability mapping"};
  app.require_subcommand(1);

  // global, available on every subcommand through fallthrough
  std::string config_sink;
  app.add_option("--config", config_sink, "key=value config file");
  app.add_option("--out", st.cfg.out_dir, "output directory");
  app.add_option("--seed", st.cfg.seed, "master seed");
  app.add_option("--threads", st.cfg.threads, "worker threads (0 = auto)");
  app.add_option("--s0", st.cfg.input_s0, "input dose constant S0");
  app.add_option("--k-abs", st.cfg.input_k_abs, "input absorption rate");
  app.fallthrough();

  auto* gen = app.add_subcommand("gen-data", "generate a labeled dataset");
  gen->add_option("--model", st.cfg.model, "model name")->required();
  gen->add_option("--grid", st.grid, "dense|sparse|irregular");
  gen->add_option("--noise", st.noise_sigma, "observation noise std");
  gen->add_option("--mode", st.mode, "partial|full");
  gen->add_option("--n", st.n_per_class, "series per class");
  gen->add_option("--out-file", st.out_file, "output path");

  auto* fit = app.add_subcommand("fit-map", "MAP-featurize a dataset");
  fit->add_option("--data", st.data_file, "dataset file")->required();
  fit->add_option("--mode", st.fit_mode, "theta|phi|both");

  auto* train = app.add_subcommand("train", "train an SVM on a features file");
  train->add_option("--features", st.features_file, "training features")->required();
  train->add_option("--test", st.test_features_file, "test features");

  auto* exp = app.add_subcommand("exp", "run experiment 1, 2 or 3");
  exp->add_option("--id", st.cfg.experiment, "experiment id")->required();
  exp->add_option("--model", st.cfg.model, "model name")->required();
  exp->add_option("--scale", st.cfg.scale, "desk-scale factor");
  exp->add_option("--train-sizes", st.cfg.train_sizes, "csv per-class sizes");

  auto* verify = app.add_subcommand("verify-si", "check gauge output equivalence");
  verify->add_option("--model", st.cfg.model, "model name or 'all'")->required();
  verify->add_option("--pairs", st.pairs, "gauge pairs per model");
  verify->add_option("--tol", st.tol, "output deviation tolerance");

  auto* report = app.add_subcommand("report", "re-aggregate and plot raw results");
  report->add_option("--raw", st.raw_file, "raw results file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(st);
    if (fit->parsed()) return cmd_fit_map(st);
    if (train->parsed()) return cmd_train(st);
    if (exp->parsed()) return cmd_exp(st);
    if (verify->parsed()) return cmd_verify_si(st);
    if (report->parsed()) return cmd_report(st);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const RegistryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
