#include "simap/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "simap/io_util.hpp"

namespace simap {

using nlohmann::json;

std::string to_string(GridKind kind) {
  switch (kind) {
    case GridKind::kDense: return "dense";
    case GridKind::kSparse: return "sparse";
    case GridKind::kIrregular: return "irregular";
  }
  return "dense";
}

GridKind grid_kind_from_string(const std::string& s) {
  if (s == "dense") return GridKind::kDense;
  if (s == "sparse") return GridKind::kSparse;
  if (s == "irregular") return GridKind::kIrregular;
  throw std::invalid_argument("unknown grid kind '" + s + "'");
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) out[i] = series[i].label;
  return out;
}

Vector make_grid(const TimeGridSpec& spec, Rng& rng) {
  const Vector& dense = spec.dense_grid;
  const int n_dense = static_cast<int>(dense.size());
  if (spec.kind == GridKind::kDense) return dense;

  if (!(spec.fraction > 0.0 && spec.fraction <= 1.0)) {
    throw std::invalid_argument("make_grid: fraction out of (0, 1]");
  }
  const int count =
      std::max(2, static_cast<int>(std::floor(spec.fraction * n_dense + 0.5)));

  Vector grid(count);
  if (spec.kind == GridKind::kSparse) {
    // evenly spaced by index, keeping both ends (so t = 0 is always present)
    for (int i = 0; i < count; ++i) {
      const int idx = static_cast<int>(
          std::lround(static_cast<double>(i) * (n_dense - 1) / (count - 1)));
      grid[i] = dense[idx];
    }
    return grid;
  }

  // irregular: t = 0 plus count-1 uniform draws on (0, t_end], fresh per call
  const double t_end = dense[n_dense - 1];
  for (;;) {
    grid[0] = 0.0;
    for (int i = 1; i < count; ++i) {
      double t;
      do {
        t = rng.uniform(0.0, t_end);
      } while (t == 0.0);
      grid[i] = t;
    }
    std::sort(grid.data() + 1, grid.data() + count);
    bool distinct = true;
    for (int i = 1; i < count; ++i) {
      if (grid[i] <= grid[i - 1]) distinct = false;
    }
    if (distinct) return grid;
  }
}

Vector sample_class_theta(const ClassTask& task, int label, const Matrix& roi,
                          Rng& rng) {
  if (label != 0 && label != 1) {
    throw std::invalid_argument("sample_class_theta: label must be 0 or 1");
  }
  const Vector& mean = task.mean(label);
  const Vector& cov = task.cov_diag(label);
  const int n = static_cast<int>(mean.size());
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vector theta(n);
    bool inside = true;
    for (int i = 0; i < n; ++i) {
      theta[i] = mean[i] + std::sqrt(cov[i]) * rng.normal();
      if (theta[i] < roi(i, 0) || theta[i] > roi(i, 1)) inside = false;
    }
    if (inside) return theta;
  }
  throw std::runtime_error(
      "sample_class_theta: 1000 consecutive draws left the ROI; "
      "class distribution inconsistent with the ROI");
}

namespace {

// stream tags within one series
constexpr std::uint64_t kThetaStream = 0;
constexpr std::uint64_t kGridStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

LabeledSeries generate_series(const ModelDefinition& model,
                              const TimeGridSpec& grid_spec,
                              const NoiseSpec& noise, int label,
                              std::uint64_t stream_id, const Rng& parent) {
  Rng series_rng = parent.split(stream_id);
  Rng theta_rng = series_rng.split(kThetaStream);
  Rng grid_rng = series_rng.split(kGridStream);
  Rng noise_rng = series_rng.split(kNoiseStream);

  LabeledSeries s;
  s.label = label;
  s.stream = stream_id;
  s.true_theta = sample_class_theta(model.classes, label, model.roi, theta_rng);
  s.times = make_grid(grid_spec, grid_rng);

  const Trajectory traj = integrate(model.system, s.true_theta, s.times);
  const int L = static_cast<int>(s.times.size());
  const int d = model.system.state_dim;
  const int r = noise.dim();
  s.outputs.resize(L, r);
  // Draw the full d channels of noise regardless of mode so partial series
  // reproduce column 1 of full-observation series bit for bit.
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < d; ++j) {
      const double n = noise_rng.normal();
      if (noise.mode == ObservationMode::kFull) {
        s.outputs(i, j) = traj.states(i, j) + std::sqrt(noise.variance(j)) * n;
      } else if (j == 0) {
        s.outputs(i, 0) = traj.states(i, 0) + std::sqrt(noise.variance(0)) * n;
      }
    }
  }
  return s;
}

}  // namespace

Dataset generate_dataset(const ModelDefinition& model,
                         const TimeGridSpec& grid_spec, const NoiseSpec& noise,
                         int n_per_class, Rng& rng) {
  if (n_per_class < 1) {
    throw std::invalid_argument("generate_dataset: n_per_class must be >= 1");
  }
  Dataset ds;
  ds.model = model.name;
  ds.grid = grid_spec.kind;
  ds.noise = noise;

  const int total = 2 * n_per_class;
  ds.series.reserve(total);
  for (int i = 0; i < total; ++i) {
    const int label = i < n_per_class ? 0 : 1;
    try {
      ds.series.push_back(generate_series(model, grid_spec, noise, label,
                                          static_cast<std::uint64_t>(i), rng));
    } catch (const IntegrationError& e) {
      throw IntegrationError(e.time, "series " + std::to_string(i) + ": " +
                                         e.what());
    }
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng = rng.split(0xD5AAFFull);  // dataset-level shuffle stream
  shuffle_rng.shuffle(order);
  std::vector<LabeledSeries> shuffled;
  shuffled.reserve(total);
  for (auto idx : order) shuffled.push_back(std::move(ds.series[idx]));
  ds.series = std::move(shuffled);
  return ds;
}

Dataset project_to_partial(const Dataset& fo, double partial_var) {
  if (fo.noise.mode != ObservationMode::kFull) {
    throw std::invalid_argument("project_to_partial: input is not full-observation");
  }
  Dataset po = fo;
  po.noise = NoiseSpec{ObservationMode::kPartial, Vector(), partial_var};
  for (auto& s : po.series) s.outputs = s.outputs.col(0).eval();
  return po;
}

// ---- serialization ----------------------------------------------------------

namespace {
constexpr const char* kDatasetMagic = "# simap dataset v1";
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  std::ostringstream out;
  out << kDatasetMagic << "\n";
  json header;
  header["format"] = "simap.dataset";
  header["version"] = 1;
  header["model"] = ds.model;
  header["grid"] = to_string(ds.grid);
  header["noise_mode"] =
      ds.noise.mode == ObservationMode::kFull ? "full" : "partial";
  if (ds.noise.mode == ObservationMode::kFull) {
    header["noise_var"] = std::vector<double>(
        ds.noise.full_cov_diag.data(),
        ds.noise.full_cov_diag.data() + ds.noise.full_cov_diag.size());
  } else {
    header["noise_var"] = std::vector<double>{ds.noise.partial_var};
  }
  header["seed"] = ds.seed;
  header["n_series"] = ds.series.size();
  out << header.dump() << "\n";

  for (std::size_t k = 0; k < ds.series.size(); ++k) {
    const LabeledSeries& s = ds.series[k];
    out << "@series " << k << " label=" << s.label << " stream=" << s.stream
        << " len=" << s.times.size() << " dim=" << s.outputs.cols()
        << " theta=";
    for (int i = 0; i < s.true_theta.size(); ++i) {
      if (i) out << ',';
      out << fmt_double(s.true_theta[i]);
    }
    out << "\n";
    for (int i = 0; i < s.times.size(); ++i) {
      out << fmt_double(s.times[i]);
      for (int j = 0; j < s.outputs.cols(); ++j) {
        out << ' ' << fmt_double(s.outputs(i, j));
      }
      out << "\n";
    }
  }
  atomic_write(path, out.str());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  int line_no = 0;

  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  };

  if (!next_line() || line != kDatasetMagic) {
    throw ParseError("missing dataset magic header", line_no);
  }
  if (!next_line()) throw ParseError("missing JSON header", line_no);

  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("format", "") != "simap.dataset") {
    throw ParseError("bad JSON header", line_no);
  }

  Dataset ds;
  ds.model = header.at("model").get<std::string>();
  ds.grid = grid_kind_from_string(header.at("grid").get<std::string>());
  ds.seed = header.value("seed", 0ull);
  const bool full = header.at("noise_mode").get<std::string>() == "full";
  const auto vars = header.at("noise_var").get<std::vector<double>>();
  if (full) {
    Vector v(static_cast<int>(vars.size()));
    for (std::size_t i = 0; i < vars.size(); ++i) v[static_cast<int>(i)] = vars[i];
    ds.noise = NoiseSpec{ObservationMode::kFull, v, 0.0};
  } else {
    ds.noise = NoiseSpec{ObservationMode::kPartial, Vector(),
                         vars.empty() ? 0.0 : vars[0]};
  }
  const std::size_t n_series = header.at("n_series").get<std::size_t>();

  for (std::size_t k = 0; k < n_series; ++k) {
    if (!next_line()) throw ParseError("unexpected end of file", line_no);
    auto toks = split_ws(line);
    if (toks.size() != 7 || toks[0] != "@series") {
      throw ParseError("expected @series record", line_no);
    }
    auto field = [&](const std::string& tok, const char* key) {
      const std::string prefix = std::string(key) + "=";
      if (tok.rfind(prefix, 0) != 0) {
        throw ParseError("expected '" + prefix + "...'", line_no);
      }
      return tok.substr(prefix.size());
    };
    LabeledSeries s;
    s.label = static_cast<int>(parse_long(field(toks[2], "label"), line_no));
    s.stream = std::stoull(field(toks[3], "stream"));
    const long len = parse_long(field(toks[4], "len"), line_no);
    const long dim = parse_long(field(toks[5], "dim"), line_no);
    if (len < 1 || dim < 1) throw ParseError("bad series shape", line_no);
    const auto theta_toks = split_char(field(toks[6], "theta"), ',');
    s.true_theta.resize(static_cast<int>(theta_toks.size()));
    for (std::size_t i = 0; i < theta_toks.size(); ++i) {
      s.true_theta[static_cast<int>(i)] = parse_double(theta_toks[i], line_no);
    }
    s.times.resize(len);
    s.outputs.resize(len, dim);
    for (long i = 0; i < len; ++i) {
      if (!next_line()) throw ParseError("unexpected end of file", line_no);
      auto row = split_ws(line);
      if (static_cast<long>(row.size()) != dim + 1) {
        throw ParseError("expected " + std::to_string(dim + 1) + " columns",
                         line_no);
      }
      s.times[i] = parse_double(row[0], line_no);
      for (long j = 0; j < dim; ++j) {
        s.outputs(i, j) = parse_double(row[static_cast<std::size_t>(j + 1)],
                                       line_no);
      }
    }
    ds.series.push_back(std::move(s));
  }
  return ds;
}

}  // namespace simap
