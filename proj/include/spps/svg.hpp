#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "spps/errors.hpp"
#include "spps/numerics.hpp"
#include "spps/wigner.hpp"

namespace spps::svg {

struct Series {
  std::string label;
  std::string color = "#1f77b4";
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
};

namespace detail {

inline double nice_step(double span, int target_ticks) {
  const double raw = span / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

inline std::string fmt(double v) { return num::format_double(v, 6); }

}  // namespace detail

/// Minimal deterministic line plot: axes, ticks, polylines, optional markers.
inline void write_line_plot(const std::string& path, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel,
                            const std::vector<Series>& series,
                            const std::vector<std::string>& header_comments = {}) {
  if (series.empty()) throw validation_error("svg: nothing to plot");
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty())
      throw validation_error("svg: series sizes mismatch");
    for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
    for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const int width = 640, height = 480;
  const int ml = 70, mr = 20, mt = 40, mb = 55;
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ofstream out(path);
  if (!out) throw error("cannot write '" + path + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  for (const auto& c : header_comments) out << "<!-- " << c << " -->\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\" "
         "font-family=\"sans-serif\">" << title << "</text>\n";

  // Axes and ticks.
  out << "<g stroke=\"black\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
      << mt + ph << "\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
      << "\"/>\n</g>\n";
  out << "<g font-size=\"11\" font-family=\"sans-serif\">\n";
  const double xstep = detail::nice_step(xmax - xmin, 6);
  for (double t = std::ceil(xmin / xstep) * xstep; t <= xmax + 1e-12 * xstep; t += xstep) {
    out << "<line x1=\"" << detail::fmt(px(t)) << "\" y1=\"" << mt + ph << "\" x2=\""
        << detail::fmt(px(t)) << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << detail::fmt(px(t)) << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\">" << num::format_double(t, 6) << "</text>\n";
  }
  const double ystep = detail::nice_step(ymax - ymin, 6);
  for (double t = std::ceil(ymin / ystep) * ystep; t <= ymax + 1e-12 * ystep; t += ystep) {
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << detail::fmt(py(t)) << "\" x2=\"" << ml
        << "\" y2=\"" << detail::fmt(py(t)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << detail::fmt(py(t) + 4)
        << "\" text-anchor=\"end\">" << num::format_double(t, 6) << "</text>\n";
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  out << "<text x=\"16\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">"
      << ylabel << "</text>\n</g>\n";

  int legend_y = mt + 14;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << detail::fmt(px(s.x[i])) << ',' << detail::fmt(py(s.y[i])) << ' ';
    out << "\"/>\n";
    if (s.markers)
      for (std::size_t i = 0; i < s.x.size(); ++i)
        out << "<circle cx=\"" << detail::fmt(px(s.x[i])) << "\" cy=\"" << detail::fmt(py(s.y[i]))
            << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    if (!s.label.empty()) {
      out << "<line x1=\"" << ml + pw - 140 << "\" y1=\"" << legend_y - 4 << "\" x2=\""
          << ml + pw - 120 << "\" y2=\"" << legend_y - 4 << "\" stroke=\"" << s.color
          << "\" stroke-width=\"1.5\"/>\n";
      out << "<text x=\"" << ml + pw - 114 << "\" y=\"" << legend_y
          << "\" font-size=\"11\" font-family=\"sans-serif\">" << s.label << "</text>\n";
      legend_y += 16;
    }
  }
  out << "</svg>\n";
}

/// Grayscale heatmap of a grid, downsampled to at most max_cells per axis.
inline void write_heatmap(const std::string& path, const WignerGrid& grid,
                          const std::vector<std::string>& header_comments = {},
                          int max_cells = 64) {
  const int sx = std::max(1, grid.n_x() / max_cells);
  const int sp = std::max(1, grid.n_p() / max_cells);
  const int nx = grid.n_x() / sx;
  const int np = grid.n_p() / sp;
  double vmax = 0.0;
  for (double v : grid.values()) vmax = std::max(vmax, std::abs(v));
  if (!(vmax > 0.0)) vmax = 1.0;

  const int cell = 6;
  const int width = np * cell + 40, height = nx * cell + 40;
  std::ofstream out(path);
  if (!out) throw error("cannot write '" + path + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n";
  for (const auto& c : header_comments) out << "<!-- " << c << " -->\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < np; ++j) {
      const double v = grid.value(i * sx, j * sp) / vmax;
      const int shade = static_cast<int>(255.0 * (1.0 - std::clamp(std::abs(v), 0.0, 1.0)));
      // Negative reconstruction ripple rendered in red.
      const std::string fill = v >= 0.0
          ? "rgb(" + std::to_string(shade) + ',' + std::to_string(shade) + ',' +
                std::to_string(shade) + ')'
          : "rgb(255," + std::to_string(shade) + ',' + std::to_string(shade) + ')';
      out << "<rect x=\"" << 20 + j * cell << "\" y=\"" << 20 + (nx - 1 - i) * cell
          << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"" << fill << "\"/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace spps::svg
