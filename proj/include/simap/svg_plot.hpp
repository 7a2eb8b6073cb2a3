#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "simap/experiments.hpp"

namespace simap {

struct PlotSeries {
  std::string name;
  std::vector<double> x, mean, dev;
  std::string color;
  std::string dash;  // stroke-dasharray, empty = solid
};

struct PlotPanel {
  std::string title, x_label, y_label;
  std::vector<PlotSeries> series;
};

// Self-contained SVG with the tabulated data embedded in comments, so plots
// diff cleanly.
std::string render_plot_svg(const std::string& title,
                            const std::vector<PlotPanel>& panels);

// Figure analogue for an experiment run: mean curves with +-1 std bands.
std::string experiment_plot_svg(const ExperimentResult& res);

void save_experiment_plot(const std::filesystem::path& path,
                          const ExperimentResult& res);

}  // namespace simap
