#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "simap/io_util.hpp"

namespace fs = std::filesystem;
using simap::read_file;

namespace {

const std::string kBin = SIMAP_CLI_PATH;

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() /
          ("simap_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
};

int run(const std::string& args) {
  const int rc = std::system((kBin + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

int run_capture(const std::string& args, const fs::path& log) {
  const int rc =
      std::system((kBin + " " + args + " >" + log.string() + " 2>&1").c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("gen-data is idempotent and balanced") {
  Sandbox sb;
  const std::string out1 = (sb.dir / "a.dat").string();
  const std::string out2 = (sb.dir / "b.dat").string();
  const std::string common =
      "gen-data --model toy --grid dense --noise 0.1 --n 10 --seed 7 ";
  CHECK(run(common + "--out-file " + out1) == 0);
  CHECK(run(common + "--out-file " + out2) == 0);
  const std::string bytes = read_file(out1);
  CHECK(bytes == read_file(out2));
  // 20 series and the effective config landed next to the data
  CHECK(bytes.find("\"n_series\":20") != std::string::npos);
  CHECK(fs::exists(out1 + ".config"));
}

TEST_CASE("unknown model is a usage error") {
  Sandbox sb;
  CHECK(run("gen-data --model unknown --out " + sb.dir.string()) == 2);
}

TEST_CASE("bad experiment id is a usage error") {
  Sandbox sb;
  CHECK(run("exp --id 4 --model toy --out " + sb.dir.string()) == 2);
}

TEST_CASE("fit-map writes theta and phi features") {
  Sandbox sb;
  const std::string data = (sb.dir / "toy.dat").string();
  REQUIRE(run("gen-data --model toy --n 3 --seed 3 --out-file " + data) == 0);

  // a config file speeds the fits up and exercises the config layer
  const fs::path cfg = sb.dir / "fast.cfg";
  simap::atomic_write(cfg, "anneal_budget_factor=150\npolish_max_iters=50\n");
  CHECK(run("fit-map --data " + data + " --config " + cfg.string()) == 0);

  const std::string phi = read_file(sb.dir / "toy.phi.features");
  CHECK(phi.find("\"dim\":1") != std::string::npos);
  const std::string theta = read_file(sb.dir / "toy.theta.features");
  CHECK(theta.find("\"dim\":2") != std::string::npos);
}

TEST_CASE("unknown config keys are rejected") {
  Sandbox sb;
  const fs::path cfg = sb.dir / "bad.cfg";
  simap::atomic_write(cfg, "no_such_knob=1\n");
  CHECK(run("verify-si --model toy --config " + cfg.string()) == 2);
}

TEST_CASE("train fits a model from features") {
  Sandbox sb;
  const std::string data = (sb.dir / "toy.dat").string();
  const fs::path cfg = sb.dir / "fast.cfg";
  simap::atomic_write(cfg, "anneal_budget_factor=150\npolish_max_iters=50\n");
  REQUIRE(run("gen-data --model toy --n 12 --seed 5 --out-file " + data) == 0);
  REQUIRE(run("fit-map --data " + data + " --config " + cfg.string()) == 0);
  const fs::path log = sb.dir / "train.log";
  CHECK(run_capture("train --features " + (sb.dir / "toy.phi.features").string() +
                        " --test " + (sb.dir / "toy.phi.features").string(),
                    log) == 0);
  CHECK(fs::exists(sb.dir / "toy.phi.svm.json"));
  const std::string out = read_file(log);
  CHECK(out.find("cv_error=") != std::string::npos);
  CHECK(out.find("test: error=") != std::string::npos);
}

TEST_CASE("exp smoke run emits tables, plot and summary") {
  Sandbox sb;
  const fs::path cfg = sb.dir / "fast.cfg";
  simap::atomic_write(cfg, "anneal_budget_factor=150\npolish_max_iters=50\n");
  const fs::path log = sb.dir / "exp.log";
  const std::string cmd = "exp --id 2 --model toy --scale 0.05 --seed 1 --out " +
                          sb.dir.string() + " --config " + cfg.string();
  CHECK(run_capture(cmd, log) == 0);
  CHECK(fs::exists(sb.dir / "exp2_toy_s1.raw.tsv"));
  CHECK(fs::exists(sb.dir / "exp2_toy_s1.agg.tsv"));
  CHECK(fs::exists(sb.dir / "exp2_toy_s1.svg"));
  const std::string out = read_file(log);
  CHECK(out.find("delta_eps_star=") != std::string::npos);
  CHECK(out.find("sigma_star=") != std::string::npos);

  // byte-identical on rerun
  const std::string raw = read_file(sb.dir / "exp2_toy_s1.raw.tsv");
  const std::string svg = read_file(sb.dir / "exp2_toy_s1.svg");
  CHECK(run_capture(cmd, log) == 0);
  CHECK(read_file(sb.dir / "exp2_toy_s1.raw.tsv") == raw);
  CHECK(read_file(sb.dir / "exp2_toy_s1.svg") == svg);

  // report rebuilds aggregates from the raw table
  fs::remove(sb.dir / "exp2_toy_s1.agg.tsv");
  CHECK(run("report --raw " + (sb.dir / "exp2_toy_s1.raw.tsv").string() +
            " --out " + sb.dir.string()) == 0);
  CHECK(fs::exists(sb.dir / "exp2_toy_s1.agg.tsv"));
}

TEST_CASE("verify-si reports per-model lines") {
  Sandbox sb;
  const fs::path log = sb.dir / "si.log";
  CHECK(run_capture("verify-si --model all --pairs 5 --seed 2", log) == 0);
  const std::string out = read_file(log);
  int pass_lines = 0;
  std::size_t pos = 0;
  while ((pos = out.find("PASS", pos)) != std::string::npos) {
    ++pass_lines;
    pos += 4;
  }
  CHECK(pass_lines == 5);
  CHECK(out.find("laplace") != std::string::npos);
}

TEST_CASE("missing subcommand is a usage error") {
  CHECK(run("") == 2);
}
