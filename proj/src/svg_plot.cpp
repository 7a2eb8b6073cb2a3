#include "simap/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "simap/io_util.hpp"

namespace simap {

namespace {

constexpr double kPanelW = 460, kPanelH = 340;
constexpr double kMarginL = 58, kMarginR = 16, kMarginT = 34, kMarginB = 44;

std::string num(double v) { return fmt_double(v); }

struct Scale {
  double lo = 0, hi = 1, px0 = 0, px1 = 1;
  double operator()(double v) const {
    return px0 + (v - lo) / (hi - lo) * (px1 - px0);
  }
};

std::vector<double> nice_ticks(double lo, double hi, int target = 5) {
  const double span = hi - lo;
  if (!(span > 0)) return {lo};
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  const double first = std::ceil(lo / step) * step;
  for (double t = first; t <= hi + 1e-9 * span; t += step) {
    ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  }
  return ticks;
}

void render_panel(std::ostringstream& out, const PlotPanel& panel, double ox) {
  double xlo = 1e300, xhi = -1e300, ylo = 0.0, yhi = -1e300;
  for (const auto& s : panel.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      yhi = std::max(yhi, s.mean[i] + s.dev[i]);
      ylo = std::min(ylo, s.mean[i] - s.dev[i]);
    }
  }
  if (xhi <= xlo) {
    xhi = xlo + 1;
  }
  if (yhi <= ylo) yhi = ylo + 1;
  yhi *= 1.05;

  const Scale sx{xlo, xhi, ox + kMarginL, ox + kPanelW - kMarginR};
  const Scale sy{ylo, yhi, kPanelH - kMarginB, kMarginT};

  out << "<g>\n";
  out << "<rect x='" << num(ox + kMarginL) << "' y='" << num(kMarginT)
      << "' width='" << num(kPanelW - kMarginL - kMarginR) << "' height='"
      << num(kPanelH - kMarginT - kMarginB)
      << "' fill='none' stroke='#444' stroke-width='1'/>\n";
  out << "<text x='" << num(ox + kPanelW / 2) << "' y='20' font-size='13' "
         "text-anchor='middle' font-family='sans-serif'>"
      << panel.title << "</text>\n";

  for (double t : nice_ticks(xlo, xhi)) {
    out << "<line x1='" << num(sx(t)) << "' y1='" << num(sy.px0) << "' x2='"
        << num(sx(t)) << "' y2='" << num(sy.px0 + 4)
        << "' stroke='#444' stroke-width='1'/>\n";
    out << "<text x='" << num(sx(t)) << "' y='" << num(sy.px0 + 16)
        << "' font-size='10' text-anchor='middle' font-family='sans-serif'>"
        << num(t) << "</text>\n";
  }
  for (double t : nice_ticks(ylo, yhi)) {
    out << "<line x1='" << num(sx.px0 - 4) << "' y1='" << num(sy(t)) << "' x2='"
        << num(sx.px0) << "' y2='" << num(sy(t))
        << "' stroke='#444' stroke-width='1'/>\n";
    out << "<text x='" << num(sx.px0 - 6) << "' y='" << num(sy(t) + 3)
        << "' font-size='10' text-anchor='end' font-family='sans-serif'>"
        << num(t) << "</text>\n";
  }
  out << "<text x='" << num(ox + kMarginL + (kPanelW - kMarginL - kMarginR) / 2)
      << "' y='" << num(kPanelH - 10)
      << "' font-size='11' text-anchor='middle' font-family='sans-serif'>"
      << panel.x_label << "</text>\n";
  out << "<text x='" << num(ox + 14) << "' y='"
      << num(kMarginT + (kPanelH - kMarginT - kMarginB) / 2)
      << "' font-size='11' text-anchor='middle' font-family='sans-serif' "
         "transform='rotate(-90 "
      << num(ox + 14) << ' '
      << num(kMarginT + (kPanelH - kMarginT - kMarginB) / 2) << ")'>"
      << panel.y_label << "</text>\n";

  // band then line per series
  for (const auto& s : panel.series) {
    if (s.x.empty()) continue;
    out << "<polygon fill='" << s.color << "' fill-opacity='0.15' "
        << "stroke='none' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << num(sx(s.x[i])) << ',' << num(sy(s.mean[i] + s.dev[i])) << ' ';
    }
    for (std::size_t i = s.x.size(); i-- > 0;) {
      out << num(sx(s.x[i])) << ',' << num(sy(s.mean[i] - s.dev[i])) << ' ';
    }
    out << "'/>\n";
  }
  for (const auto& s : panel.series) {
    if (s.x.empty()) continue;
    out << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.8'";
    if (!s.dash.empty()) out << " stroke-dasharray='" << s.dash << "'";
    out << " points='";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << num(sx(s.x[i])) << ',' << num(sy(s.mean[i])) << ' ';
    }
    out << "'/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << "<circle cx='" << num(sx(s.x[i])) << "' cy='" << num(sy(s.mean[i]))
          << "' r='2.2' fill='" << s.color << "'/>\n";
    }
  }

  // legend
  double ly = kMarginT + 10;
  for (const auto& s : panel.series) {
    const double lx = ox + kPanelW - kMarginR - 110;
    out << "<line x1='" << num(lx) << "' y1='" << num(ly) << "' x2='"
        << num(lx + 26) << "' y2='" << num(ly) << "' stroke='" << s.color
        << "' stroke-width='1.8'";
    if (!s.dash.empty()) out << " stroke-dasharray='" << s.dash << "'";
    out << "/>\n";
    out << "<text x='" << num(lx + 32) << "' y='" << num(ly + 3.5)
        << "' font-size='11' font-family='sans-serif'>" << s.name
        << "</text>\n";
    ly += 14;
  }
  out << "</g>\n";
}

struct ArmStyle {
  const char* color;
  const char* dash;
};

ArmStyle style_for(const std::string& condition) {
  if (condition == "FO") return {"#2ca02c", "2,4"};
  if (condition == "PO") return {"#ff7f0e", "7,4"};
  return {"#1f77b4", ""};
}

PlotSeries to_series(const LearningCurve& c, bool rel_sv) {
  PlotSeries s;
  s.name = c.condition;
  const ArmStyle st = style_for(c.condition);
  s.color = st.color;
  s.dash = st.dash;
  for (const auto& pt : c.points) {
    if (!pt.valid) continue;
    s.x.push_back(pt.x);
    s.mean.push_back(rel_sv ? pt.mean_rel_sv : pt.mean_error);
    s.dev.push_back(rel_sv ? pt.std_rel_sv : pt.std_error);
  }
  return s;
}

}  // namespace

std::string render_plot_svg(const std::string& title,
                            const std::vector<PlotPanel>& panels) {
  const double width = kPanelW * panels.size();
  std::ostringstream out;
  out << "<?xml version='1.0' encoding='UTF-8'?>\n";
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << num(width)
      << "' height='" << num(kPanelH) << "' viewBox='0 0 " << num(width) << ' '
      << num(kPanelH) << "'>\n";
  out << "<!-- " << title << " -->\n";
  for (const auto& panel : panels) {
    out << "<!-- data: " << panel.title << "\n";
    out << "series\tx\tmean\tstd\n";
    for (const auto& s : panel.series) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        out << s.name << '\t' << num(s.x[i]) << '\t' << num(s.mean[i]) << '\t'
            << num(s.dev[i]) << "\n";
      }
    }
    out << "-->\n";
  }
  double ox = 0;
  for (const auto& panel : panels) {
    render_panel(out, panel, ox);
    ox += kPanelW;
  }
  out << "</svg>\n";
  return out.str();
}

std::string experiment_plot_svg(const ExperimentResult& res) {
  std::vector<PlotPanel> panels;
  const std::string x_label =
      res.experiment == 2 ? "observation noise sigma" : "training examples per class";

  if (res.experiment == 3) {
    for (GridKind kind :
         {GridKind::kDense, GridKind::kSparse, GridKind::kIrregular}) {
      PlotPanel panel;
      panel.title = res.model + " / " + to_string(kind) + " grid";
      panel.x_label = x_label;
      panel.y_label = "generalization error";
      for (const auto& c : res.curves) {
        if (c.grid == kind) panel.series.push_back(to_series(c, false));
      }
      panels.push_back(std::move(panel));
    }
  } else {
    PlotPanel err;
    err.title = res.model + " / generalization error";
    err.x_label = x_label;
    err.y_label = "generalization error";
    PlotPanel sv;
    sv.title = res.model + " / relative support vectors";
    sv.x_label = x_label;
    sv.y_label = "relative number of SVs";
    for (const auto& c : res.curves) {
      err.series.push_back(to_series(c, false));
      sv.series.push_back(to_series(c, true));
    }
    panels.push_back(std::move(err));
    panels.push_back(std::move(sv));
  }
  return render_plot_svg(
      "experiment " + std::to_string(res.experiment) + " / " + res.model,
      panels);
}

void save_experiment_plot(const std::filesystem::path& path,
                          const ExperimentResult& res) {
  atomic_write(path, experiment_plot_svg(res));
}

}  // namespace simap
