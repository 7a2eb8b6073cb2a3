#include "simap/config.hpp"

#include <cstdlib>
#include <sstream>

#include "simap/io_util.hpp"
#include "simap/parallel.hpp"

namespace simap {

namespace {

template <class T>
T parse_num(const std::string& v, const std::string& key);

template <>
double parse_num<double>(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": '" + v + "'");
  }
}

template <>
long parse_num<long>(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    const long out = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for " + key + ": '" + v + "'");
  }
}

template <>
int parse_num<int>(const std::string& v, const std::string& key) {
  return static_cast<int>(parse_num<long>(v, key));
}

template <>
std::uint64_t parse_num<std::uint64_t>(const std::string& v,
                                       const std::string& key) {
  try {
    std::size_t used = 0;
    const std::uint64_t out = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for " + key + ": '" + v + "'");
  }
}

}  // namespace

void apply_config_kv(RunConfig& cfg, const std::string& key,
                     const std::string& value) {
  if (key == "model") cfg.model = value;
  else if (key == "experiment") cfg.experiment = parse_num<int>(value, key);
  else if (key == "seed") cfg.seed = parse_num<std::uint64_t>(value, key);
  else if (key == "scale") cfg.scale = parse_num<double>(value, key);
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "threads") cfg.threads = parse_num<int>(value, key);
  else if (key == "anneal_budget_factor") cfg.anneal_budget_factor = parse_num<int>(value, key);
  else if (key == "anneal_cooling") cfg.anneal_cooling = parse_num<double>(value, key);
  else if (key == "anneal_evals_per_temp") cfg.anneal_evals_per_temp = parse_num<int>(value, key);
  else if (key == "anneal_step_fraction") cfg.anneal_step_fraction = parse_num<double>(value, key);
  else if (key == "anneal_probes") cfg.anneal_probes = parse_num<int>(value, key);
  else if (key == "polish_max_iters") cfg.polish_max_iters = parse_num<int>(value, key);
  else if (key == "polish_lm_iters") cfg.polish_lm_iters = parse_num<int>(value, key);
  else if (key == "polish_init_fraction") cfg.polish_init_fraction = parse_num<double>(value, key);
  else if (key == "map_rel_tol") cfg.map_rel_tol = parse_num<double>(value, key);
  else if (key == "map_abs_tol") cfg.map_abs_tol = parse_num<double>(value, key);
  else if (key == "svm_c_values") cfg.svm_c_values = value;
  else if (key == "svm_scale_factors") cfg.svm_scale_factors = value;
  else if (key == "svm_folds") cfg.svm_folds = parse_num<int>(value, key);
  else if (key == "svm_kkt_tol") cfg.svm_kkt_tol = parse_num<double>(value, key);
  else if (key == "svm_max_iters") cfg.svm_max_iters = parse_num<long>(value, key);
  else if (key == "input_s0") cfg.input_s0 = parse_num<double>(value, key);
  else if (key == "input_k_abs") cfg.input_k_abs = parse_num<double>(value, key);
  else if (key == "exp2_train_per_class") cfg.exp2_train_per_class = parse_num<int>(value, key);
  else if (key == "train_sizes") cfg.train_sizes = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key=value at " + path.string() + ":" +
                        std::to_string(line_no));
    }
    auto trim = [](std::string s) {
      const auto x = s.find_first_not_of(" \t");
      const auto y = s.find_last_not_of(" \t");
      return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
    };
    apply_config_kv(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

std::string render_config(const RunConfig& c) {
  std::ostringstream out;
  out << "# simap config v1\n";
  out << "anneal_budget_factor=" << c.anneal_budget_factor << "\n";
  out << "anneal_cooling=" << fmt_double(c.anneal_cooling) << "\n";
  out << "anneal_evals_per_temp=" << c.anneal_evals_per_temp << "\n";
  out << "anneal_probes=" << c.anneal_probes << "\n";
  out << "anneal_step_fraction=" << fmt_double(c.anneal_step_fraction) << "\n";
  out << "exp2_train_per_class=" << c.exp2_train_per_class << "\n";
  out << "experiment=" << c.experiment << "\n";
  out << "input_k_abs=" << fmt_double(c.input_k_abs) << "\n";
  out << "input_s0=" << fmt_double(c.input_s0) << "\n";
  out << "map_abs_tol=" << fmt_double(c.map_abs_tol) << "\n";
  out << "map_rel_tol=" << fmt_double(c.map_rel_tol) << "\n";
  out << "model=" << c.model << "\n";
  out << "out_dir=" << resolve_out_dir(c) << "\n";
  out << "polish_init_fraction=" << fmt_double(c.polish_init_fraction) << "\n";
  out << "polish_lm_iters=" << c.polish_lm_iters << "\n";
  out << "polish_max_iters=" << c.polish_max_iters << "\n";
  out << "scale=" << fmt_double(c.scale) << "\n";
  out << "seed=" << c.seed << "\n";
  out << "svm_c_values=" << c.svm_c_values << "\n";
  out << "svm_folds=" << c.svm_folds << "\n";
  out << "svm_kkt_tol=" << fmt_double(c.svm_kkt_tol) << "\n";
  out << "svm_max_iters=" << c.svm_max_iters << "\n";
  out << "svm_scale_factors=" << c.svm_scale_factors << "\n";
  out << "threads=" << c.threads << "\n";
  out << "train_sizes=" << c.train_sizes << "\n";
  return out.str();
}

std::string resolve_out_dir(const RunConfig& cfg) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("SIMAP_OUT_DIR")) {
    if (*env) return env;
  }
  return ".";
}

std::vector<double> parse_csv_doubles(const std::string& csv) {
  std::vector<double> out;
  for (const auto& tok : split_char(csv, ',')) {
    if (tok.empty()) continue;
    out.push_back(parse_num<double>(tok, "csv list"));
  }
  return out;
}

std::vector<int> parse_csv_ints(const std::string& csv) {
  std::vector<int> out;
  for (const auto& tok : split_char(csv, ',')) {
    if (tok.empty()) continue;
    out.push_back(parse_num<int>(tok, "csv list"));
  }
  return out;
}

OptimizerConfig optimizer_from(const RunConfig& cfg) {
  OptimizerConfig opt;
  opt.anneal.budget_factor = cfg.anneal_budget_factor;
  opt.anneal.cooling = cfg.anneal_cooling;
  opt.anneal.evals_per_temp_factor = cfg.anneal_evals_per_temp;
  opt.anneal.step_fraction = cfg.anneal_step_fraction;
  opt.anneal.probes = cfg.anneal_probes;
  opt.polish.max_iters = cfg.polish_max_iters;
  opt.polish.init_fraction = cfg.polish_init_fraction;
  opt.lm.max_iters = cfg.polish_lm_iters;
  opt.rel_tol = cfg.map_rel_tol;
  opt.abs_tol = cfg.map_abs_tol;
  return opt;
}

HyperGrid hyper_grid_from(const RunConfig& cfg) {
  HyperGrid grid;
  grid.c_values = parse_csv_doubles(cfg.svm_c_values);
  grid.scale_factors = parse_csv_doubles(cfg.svm_scale_factors);
  grid.folds = cfg.svm_folds;
  if (grid.c_values.empty() || grid.scale_factors.empty()) {
    throw ConfigError("svm grid must be nonempty");
  }
  return grid;
}

SmoConfig smo_from(const RunConfig& cfg) {
  SmoConfig smo;
  smo.kkt_tol = cfg.svm_kkt_tol;
  smo.max_iters = cfg.svm_max_iters;
  return smo;
}

InputConstants input_from(const RunConfig& cfg) {
  InputConstants in;
  in.s0 = cfg.input_s0;
  in.k_abs = cfg.input_k_abs;
  return in;
}

HarnessConfig harness_from(const RunConfig& cfg) {
  HarnessConfig h;
  h.scale = cfg.scale;
  h.seed = cfg.seed;
  h.threads = cfg.threads > 0 ? cfg.threads : default_threads();
  h.optimizer = optimizer_from(cfg);
  h.hyper = hyper_grid_from(cfg);
  h.smo = smo_from(cfg);
  h.exp2_train_per_class = cfg.exp2_train_per_class;
  if (!cfg.train_sizes.empty()) h.train_sizes = parse_csv_ints(cfg.train_sizes);
  return h;
}

}  // namespace simap
