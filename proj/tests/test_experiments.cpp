#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "simap/experiments.hpp"
#include "simap/io_util.hpp"
#include "simap/model_constants.hpp"

using namespace simap;

namespace {

HarnessConfig tiny_cfg(double scale, std::uint64_t seed) {
  HarnessConfig cfg;
  cfg.scale = scale;
  cfg.seed = seed;
  cfg.threads = 2;
  // structure-level checks only; a small optimizer budget keeps them quick
  cfg.optimizer.anneal.budget_factor = 150;
  cfg.optimizer.polish.max_iters = 60;
  return cfg;
}

}  // namespace

TEST_CASE("aggregate mean and sample std") {
  const CurvePoint a = aggregate({0.1, 0.1, 0.1}, {0.2, 0.2, 0.2}, 10);
  CHECK(a.mean_error == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(a.std_error == 0.0);
  CHECK(a.valid);

  const CurvePoint b = aggregate({0.0, 1.0}, {0.0, 1.0}, 10);
  CHECK(b.mean_error == 0.5);
  CHECK(b.std_error == doctest::Approx(0.7071067811865476).epsilon(1e-12));

  const CurvePoint c = aggregate({0.3}, {0.1}, 5);
  CHECK(c.degenerate_std);
  CHECK(c.std_error == 0.0);

  const CurvePoint d = aggregate({}, {}, 5);
  CHECK_FALSE(d.valid);
}

TEST_CASE("noise sweep summary arithmetic") {
  LearningCurve po{"PO", GridKind::kDense, 0.0, {}};
  LearningCurve sim{"PO+SIM", GridKind::kDense, 0.0, {}};
  const double sig[3] = {0.1, 0.2, 0.3};
  const double pe[3] = {0.4, 0.45, 0.5};
  const double se[3] = {0.2, 0.4, 0.5};
  for (int i = 0; i < 3; ++i) {
    CurvePoint p;
    p.x = sig[i];
    p.mean_error = pe[i];
    po.points.push_back(p);
    p.mean_error = se[i];
    sim.points.push_back(p);
  }
  const NoiseSweepSummary s = noise_sweep_summary(po, sim);
  CHECK(s.delta_eps_star == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(s.sigma_star == 0.1);
  CHECK(s.mean_delta_eps == doctest::Approx(0.25 / 3.0).epsilon(1e-12));
}

TEST_CASE("hyper grid shrinks proportionally and keeps endpoints") {
  const HyperGrid full = default_hyper_grid();
  const HyperGrid half = shrink_hyper_grid(full, 0.5);
  CHECK(half.c_values.size() == 3);
  CHECK(half.scale_factors.size() == 3);
  CHECK(half.c_values.front() == full.c_values.front());
  CHECK(half.c_values.back() == full.c_values.back());
  const HyperGrid same = shrink_hyper_grid(full, 1.0);
  CHECK(same.c_values == full.c_values);
}

TEST_CASE("default train size ladders") {
  CHECK(default_train_sizes(make_model("toy")) ==
        std::vector<int>({10, 20, 50, 100}));
  CHECK(default_train_sizes(make_model("ccm2")) ==
        std::vector<int>({10, 20, 50, 100}));
  CHECK(default_train_sizes(make_model("ccm4")) ==
        std::vector<int>({10, 20, 50, 100, 200, 400}));
  CHECK(default_train_sizes(make_model("br")) ==
        std::vector<int>({10, 20, 50, 100, 200}));
}

TEST_CASE("experiment 1 structure and reproducibility on the toy model") {
  const ModelDefinition toy = make_model("toy");
  HarnessConfig cfg = tiny_cfg(0.1, 9);
  cfg.train_sizes = {5, 10};
  const ExperimentResult a = run_experiment1(toy, cfg);
  const ExperimentResult b = run_experiment1(toy, cfg);

  // toy has no FO arm
  CHECK(a.curves.size() == 2);
  CHECK(a.curves[0].condition == "PO");
  CHECK(a.curves[1].condition == "PO+SIM");
  for (const auto& c : a.curves) {
    CHECK(c.points.size() == 2);
    for (const auto& pt : c.points) {
      CHECK(pt.valid);
      CHECK(pt.mean_error >= 0.0);
      CHECK(pt.mean_error <= 1.0);
      CHECK(pt.trials_ok == 2);  // round(20 * 0.1)
    }
  }
  // trials x sizes x arms raw records
  CHECK(a.raw.size() == 2 * 2 * 2);
  CHECK(render_results(a) == render_results(b));
  CHECK(render_aggregates(a) == render_aggregates(b));

  // different seed changes the results
  HarnessConfig cfg2 = cfg;
  cfg2.seed = 10;
  const ExperimentResult c = run_experiment1(toy, cfg2);
  CHECK(render_results(a) != render_results(c));
}

TEST_CASE("experiment 1 runs all three arms for a compartmental model") {
  const ModelDefinition m = make_model("ccm2");
  HarnessConfig cfg = tiny_cfg(0.05, 4);
  cfg.train_sizes = {5};
  cfg.optimizer.anneal.budget_factor = 80;
  cfg.optimizer.polish.max_iters = 30;
  const ExperimentResult res = run_experiment1(m, cfg);
  REQUIRE(res.curves.size() == 3);
  CHECK(res.curves[0].condition == "FO");
  CHECK(res.curves[1].condition == "PO");
  CHECK(res.curves[2].condition == "PO+SIM");
  for (const auto& c : res.curves) CHECK(c.points.at(0).valid);
}

TEST_CASE("experiment 2 produces one point per sigma and a summary") {
  const ModelDefinition toy = make_model("toy");
  HarnessConfig cfg = tiny_cfg(0.1, 5);
  const ExperimentResult res = run_experiment2(toy, cfg);
  REQUIRE(res.curves.size() == 2);
  REQUIRE(res.summary.has_value());
  const int n_sigma = static_cast<int>(toy.sigma_range.size());
  CHECK(static_cast<int>(res.curves[0].points.size()) == n_sigma);
  for (int i = 0; i < n_sigma; ++i) {
    CHECK(res.curves[0].points[i].x == toy.sigma_range[i]);
  }
  // summary identities hold against the stored curves
  const NoiseSweepSummary again =
      noise_sweep_summary(res.curves[0], res.curves[1]);
  CHECK(again.delta_eps_star == res.summary->delta_eps_star);
  CHECK(again.sigma_star == res.summary->sigma_star);
  CHECK(again.mean_delta_eps == res.summary->mean_delta_eps);
}

TEST_CASE("experiment 3 covers three grids x two arms") {
  const ModelDefinition toy = make_model("toy");
  HarnessConfig cfg = tiny_cfg(0.05, 6);
  cfg.train_sizes = {5};
  const ExperimentResult res = run_experiment3(toy, cfg);
  CHECK(res.curves.size() == 6);
  int dense = 0, sparse = 0, irregular = 0;
  for (const auto& c : res.curves) {
    if (c.grid == GridKind::kDense) ++dense;
    if (c.grid == GridKind::kSparse) ++sparse;
    if (c.grid == GridKind::kIrregular) ++irregular;
    CHECK(c.sigma == toy.exp3_sigma);
  }
  CHECK(dense == 2);
  CHECK(sparse == 2);
  CHECK(irregular == 2);
}

TEST_CASE("results file round-trip rebuilds identical aggregates") {
  const ModelDefinition toy = make_model("toy");
  HarnessConfig cfg = tiny_cfg(0.1, 11);
  cfg.train_sizes = {5, 10};
  const ExperimentResult res = run_experiment1(toy, cfg);

  const auto path =
      std::filesystem::temp_directory_path() / "simap_test_results.tsv";
  save_results(path, res);
  const ExperimentResult loaded = load_results(path);
  CHECK(loaded.experiment == 1);
  CHECK(loaded.model == "toy");
  CHECK(loaded.raw.size() == res.raw.size());
  CHECK(render_results(loaded) == render_results(res));
  CHECK(render_aggregates(loaded) == render_aggregates(res));
  std::filesystem::remove(path);
}

TEST_CASE("verify_si passes for toy and br") {
  for (const std::string name : {"toy", "br"}) {
    const SiModelReport rep = verify_si(make_model(name), 20, 1e-5, 42);
    INFO(name);
    CHECK(rep.pass);
    CHECK(rep.max_sim_dev <= 1e-10);
  }
}

TEST_CASE("verify_si fails under an impossible tolerance") {
  const SiModelReport rep = verify_si(make_model("br"), 5, 0.0, 42);
  CHECK_FALSE(rep.pass);
}
