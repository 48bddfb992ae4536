#pragma once

// Minimal self-contained SVG line charts for the report figures. The root
// element carries data-extent attributes so downstream checks can verify the
// axis ranges cover the plotted data.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gasid {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::string annotation;  // e.g. config hash, rendered as a comment
};

namespace detail {

inline std::string svg_num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

inline void write_line_chart(const LineChart& chart, const std::string& path) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  std::size_t points = 0;
  for (const Series& s : chart.series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("series x/y length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
      ++points;
    }
  }
  if (points == 0) throw std::invalid_argument("no finite points to plot");
  if (xmax == xmin) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  if (ymax == ymin) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  // Pad the axis range so every marker sits inside the frame.
  const double xpad = 0.05 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
  const double ax0 = xmin - xpad, ax1 = xmax + xpad;
  const double ay0 = ymin - ypad, ay1 = ymax + ypad;

  const double width = 860, height = 520;
  const double left = 80, right = 640, top = 50, bottom = 460;
  auto px = [&](double x) { return left + (x - ax0) / (ax1 - ax0) * (right - left); };
  auto py = [&](double y) { return bottom - (y - ay0) / (ay1 - ay0) * (bottom - top); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  constexpr int n_colors = 8;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write chart: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\""
      << " data-xmin=\"" << detail::svg_num(ax0) << "\" data-xmax=\"" << detail::svg_num(ax1)
      << "\" data-ymin=\"" << detail::svg_num(ay0) << "\" data-ymax=\"" << detail::svg_num(ay1)
      << "\">\n";
  if (!chart.annotation.empty()) {
    out << "<!-- " << detail::xml_escape(chart.annotation) << " -->\n";
  }
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << (left + right) / 2 << "\" y=\"28\" text-anchor=\"middle\""
      << " font-family=\"sans-serif\" font-size=\"17\">" << detail::xml_escape(chart.title)
      << "</text>\n";

  // Axes with 5 ticks per side.
  out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
      << bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = ax0 + (ax1 - ax0) * t / 4.0;
    const double fy = ay0 + (ay1 - ay0) * t / 4.0;
    out << "<line x1=\"" << px(fx) << "\" y1=\"" << bottom << "\" x2=\"" << px(fx) << "\" y2=\""
        << bottom + 6 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px(fx) << "\" y=\"" << bottom + 22
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << detail::svg_num(fx) << "</text>\n";
    out << "<line x1=\"" << left - 6 << "\" y1=\"" << py(fy) << "\" x2=\"" << left << "\" y2=\""
        << py(fy) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left - 10 << "\" y=\"" << py(fy) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
        << detail::svg_num(fy) << "</text>\n";
  }
  out << "<text x=\"" << (left + right) / 2 << "\" y=\"" << bottom + 45
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << detail::xml_escape(chart.x_label) << "</text>\n";
  out << "<text x=\"22\" y=\"" << (top + bottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\""
      << " transform=\"rotate(-90 22 " << (top + bottom) / 2 << ")\">"
      << detail::xml_escape(chart.y_label) << "</text>\n";

  int idx = 0;
  for (const Series& s : chart.series) {
    const char* color = palette[idx % n_colors];
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      pts << detail::svg_num(px(s.x[i])) << ',' << detail::svg_num(py(s.y[i])) << ' ';
    }
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\""
        << pts.str() << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      out << "<circle cx=\"" << detail::svg_num(px(s.x[i])) << "\" cy=\""
          << detail::svg_num(py(s.y[i])) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    const double ly = top + 20.0 * idx;
    out << "<line x1=\"" << right + 15 << "\" y1=\"" << ly << "\" x2=\"" << right + 40
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << right + 46 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << detail::xml_escape(s.name)
        << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("failed writing chart: " + path);
}

}  // namespace gasid
