#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "simap/models.hpp"

namespace simap {

enum class GridKind { kDense, kSparse, kIrregular };

std::string to_string(GridKind kind);
GridKind grid_kind_from_string(const std::string& s);

struct TimeGridSpec {
  GridKind kind = GridKind::kDense;
  Vector dense_grid;
  double fraction = 0.4;
};

struct NoiseSpec {
  ObservationMode mode = ObservationMode::kPartial;
  Vector full_cov_diag;      // per-channel variances, full observation
  double partial_var = 0.0;  // scalar variance, partial observation

  int dim() const {
    return mode == ObservationMode::kFull
               ? static_cast<int>(full_cov_diag.size())
               : 1;
  }
  double variance(int channel) const {
    return mode == ObservationMode::kFull ? full_cov_diag[channel]
                                          : partial_var;
  }
  static NoiseSpec full(const ModelDefinition& m) {
    return {ObservationMode::kFull, m.noise_fo, 0.0};
  }
  static NoiseSpec partial(const ModelDefinition& m) {
    return {ObservationMode::kPartial, Vector(), m.noise_po};
  }
  static NoiseSpec partial_sigma(double sigma) {
    return {ObservationMode::kPartial, Vector(), sigma * sigma};
  }
};

struct LabeledSeries {
  Vector times;
  Matrix outputs;  // L x r
  int label = 0;
  Vector true_theta;        // diagnostics only, never a training input
  std::uint64_t stream = 0; // per-series rng stream id
};

struct Dataset {
  std::string model;
  GridKind grid = GridKind::kDense;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  std::vector<LabeledSeries> series;

  std::vector<int> labels() const;
};

// dense -> the model grid verbatim; sparse -> index-even subset with t=0,
// round(0.4 L) points; irregular -> t=0 plus uniform draws on (0, t_end].
Vector make_grid(const TimeGridSpec& spec, Rng& rng);

// theta ~ N(mean_label, cov_label), rejection-resampled into the ROI.
Vector sample_class_theta(const ClassTask& task, int label, const Matrix& roi,
                          Rng& rng);

// Balanced, shuffled synthetic set; per-series streams split from `rng` so
// generation is order-independent and FO/PO share draws.
Dataset generate_dataset(const ModelDefinition& model, const TimeGridSpec& grid,
                         const NoiseSpec& noise, int n_per_class, Rng& rng);

// Restrict a full-observation dataset to its first output column.
Dataset project_to_partial(const Dataset& fo, double partial_var);

void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace simap
