#pragma once

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmdp/csv.hpp"

namespace cmdp {

enum class PlotKind { iterates, strong, weak };

inline PlotKind plot_kind_from_name(const std::string& name) {
  if (name == "iterates") return PlotKind::iterates;
  if (name == "strong") return PlotKind::strong;
  if (name == "weak") return PlotKind::weak;
  throw std::invalid_argument("unknown plot kind: " + name);
}

/// Default column per kind; any schema column can be forced via `metric`.
inline std::string default_metric(PlotKind kind) {
  switch (kind) {
    case PlotKind::iterates: return "violation_max";
    case PlotKind::strong: return "strong_reg_u";
    case PlotKind::weak: return "weak_reg_u";
  }
  return "violation_max";
}

struct PlotSeries {
  std::string label;
  std::vector<double> x;  // episode
  std::vector<double> y;  // chosen metric
};

/// Reads one experiment CSV and extracts (episode, metric); the header must
/// match the sweep schema byte for byte.
inline PlotSeries read_series(const std::string& path, const std::string& metric) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_series: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::runtime_error("read_series: CSV schema mismatch in " + path);
  std::vector<std::string> columns = split_csv_line(line);
  std::size_t metric_col = columns.size();
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == metric) metric_col = i;
  if (metric_col == columns.size())
    throw std::runtime_error("read_series: no column named " + metric);

  PlotSeries series;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != columns.size())
      throw std::runtime_error("read_series: ragged CSV row in " + path);
    series.x.push_back(parse_double(fields[0]));
    series.y.push_back(parse_double(fields[metric_col]));
    if (series.label.empty()) {
      series.label = fields[1] + " eta=" + fields[2];
      if (fields[3] != "0") series.label += " tau=" + fields[3];
    }
  }
  if (series.x.empty()) throw std::runtime_error("read_series: no data rows in " + path);
  return series;
}

namespace detail {

inline void pad_range(double& lo, double& hi) {
  double span = hi - lo;
  double pad = span > 0.0 ? 0.05 * span : 0.5;
  lo -= pad;
  hi += pad;
}

}  // namespace detail

/// Renders a static line chart: one polyline per input series, axis labels,
/// tick marks, and a legend, with the padded data ranges recorded in a
/// machine-readable comment. No external renderer involved.
inline std::string render_svg(const std::vector<PlotSeries>& series_list,
                              const std::string& y_label) {
  if (series_list.empty()) throw std::invalid_argument("render_svg: no series");
  static const char* kPalette[] = {"#7e2f8e", "#0072bd", "#77ac30", "#d95319",
                                   "#4dbeee", "#a2142f"};
  const double width = 800, height = 500;
  const double ml = 80, mr = 20, mt = 20, mb = 55;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const PlotSeries& s : series_list)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  detail::pad_range(xmin, xmax);
  detail::pad_range(ymin, ymax);
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
         "viewBox=\"0 0 800 500\" font-family=\"sans-serif\" font-size=\"13\">\n";
  svg += "<!-- xrange " + format_double(xmin) + " " + format_double(xmax) + " yrange " +
         format_double(ymin) + " " + format_double(ymax) + " -->\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
  // Axes.
  svg += "<line x1=\"" + format_double(ml) + "\" y1=\"" + format_double(mt + ph) + "\" x2=\"" +
         format_double(ml + pw) + "\" y2=\"" + format_double(mt + ph) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_double(ml) + "\" y1=\"" + format_double(mt) + "\" x2=\"" +
         format_double(ml) + "\" y2=\"" + format_double(mt + ph) + "\" stroke=\"black\"/>\n";
  // Ticks.
  for (int t = 0; t <= 4; ++t) {
    double fx = xmin + (xmax - xmin) * t / 4.0;
    double fy = ymin + (ymax - ymin) * t / 4.0;
    svg += "<line x1=\"" + format_double(px(fx)) + "\" y1=\"" + format_double(mt + ph) +
           "\" x2=\"" + format_double(px(fx)) + "\" y2=\"" + format_double(mt + ph + 5) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + format_double(px(fx)) + "\" y=\"" + format_double(mt + ph + 20) +
           "\" text-anchor=\"middle\">" + format_double(fx) + "</text>\n";
    svg += "<line x1=\"" + format_double(ml - 5) + "\" y1=\"" + format_double(py(fy)) +
           "\" x2=\"" + format_double(ml) + "\" y2=\"" + format_double(py(fy)) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + format_double(ml - 8) + "\" y=\"" + format_double(py(fy) + 4) +
           "\" text-anchor=\"end\">" + format_double(fy) + "</text>\n";
  }
  // Axis labels.
  svg += "<text x=\"" + format_double(ml + pw / 2) + "\" y=\"" + format_double(height - 12) +
         "\" text-anchor=\"middle\">episode</text>\n";
  svg += "<text x=\"18\" y=\"" + format_double(mt + ph / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " + format_double(mt + ph / 2) +
         ")\">" + y_label + "</text>\n";
  // Series.
  for (std::size_t i = 0; i < series_list.size(); ++i) {
    const PlotSeries& s = series_list[i];
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      if (j) svg += ' ';
      svg += format_double(px(s.x[j]));
      svg += ',';
      svg += format_double(py(s.y[j]));
    }
    svg += "\"/>\n";
    // Legend entry.
    double ly = mt + 16 + 18 * static_cast<double>(i);
    svg += "<line x1=\"" + format_double(ml + pw - 150) + "\" y1=\"" + format_double(ly - 4) +
           "\" x2=\"" + format_double(ml + pw - 126) + "\" y2=\"" + format_double(ly - 4) +
           "\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"3\"/>\n";
    svg += "<text x=\"" + format_double(ml + pw - 120) + "\" y=\"" + format_double(ly) + "\">" +
           s.label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

/// Reads the input CSVs and writes the SVG chart for the chosen kind.
inline void emit_plot(const std::vector<std::string>& csv_paths, PlotKind kind,
                      const std::string& out_path, const std::string& metric_override = "") {
  std::string metric = metric_override.empty() ? default_metric(kind) : metric_override;
  std::vector<PlotSeries> series;
  series.reserve(csv_paths.size());
  for (const std::string& path : csv_paths) series.push_back(read_series(path, metric));
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_plot: cannot open " + out_path);
  out << render_svg(series, metric);
}

}  // namespace cmdp
