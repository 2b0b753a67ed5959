#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsfd::svg {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // x, y
};

namespace detail {

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return colors[i % 8];
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Frame {
  double x0 = 90, y0 = 40, width = 640, height = 380;  // plot area
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;

  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * width; }
  double py(double y) const { return y0 + height - (y - ymin) / (ymax - ymin) * height; }
};

inline void expand_range(double& lo, double& hi) {
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
}

inline std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::string out;
  out += "<rect x='" + num(f.x0) + "' y='" + num(f.y0) + "' width='" + num(f.width) +
         "' height='" + num(f.height) + "' fill='none' stroke='#333'/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double fx = f.xmin + (f.xmax - f.xmin) * t / 5.0;
    const double fy = f.ymin + (f.ymax - f.ymin) * t / 5.0;
    out += "<line x1='" + num(f.px(fx)) + "' y1='" + num(f.y0 + f.height) + "' x2='" +
           num(f.px(fx)) + "' y2='" + num(f.y0 + f.height + 5) + "' stroke='#333'/>\n";
    out += "<text x='" + num(f.px(fx)) + "' y='" + num(f.y0 + f.height + 20) +
           "' font-size='11' text-anchor='middle'>" + num(fx) + "</text>\n";
    out += "<line x1='" + num(f.x0 - 5) + "' y1='" + num(f.py(fy)) + "' x2='" + num(f.x0) +
           "' y2='" + num(f.py(fy)) + "' stroke='#333'/>\n";
    out += "<text x='" + num(f.x0 - 8) + "' y='" + num(f.py(fy) + 4) +
           "' font-size='11' text-anchor='end'>" + num(fy) + "</text>\n";
  }
  out += "<text x='" + num(f.x0 + f.width / 2) + "' y='" + num(f.y0 + f.height + 38) +
         "' font-size='13' text-anchor='middle'>" + xlabel + "</text>\n";
  out += "<text x='18' y='" + num(f.y0 + f.height / 2) +
         "' font-size='13' text-anchor='middle' transform='rotate(-90 18 " +
         num(f.y0 + f.height / 2) + ")'>" + ylabel + "</text>\n";
  return out;
}

inline std::string legend(const Frame& f, const std::vector<Series>& series) {
  std::string out;
  double y = f.y0 + 8;
  for (std::size_t s = 0; s < series.size(); ++s) {
    out += "<rect x='" + num(f.x0 + f.width + 12) + "' y='" + num(y) +
           "' width='14' height='5' fill='" + palette(s) + "'/>\n";
    out += "<text x='" + num(f.x0 + f.width + 30) + "' y='" + num(y + 6) + "' font-size='12'>" +
           series[s].name + "</text>\n";
    y += 18;
  }
  return out;
}

}  // namespace detail

inline std::string render_lines(const std::string& title, const std::string& xlabel,
                                const std::string& ylabel, const std::vector<Series>& series) {
  if (series.empty()) throw std::invalid_argument("svg: no series to plot");
  for (const auto& s : series)
    if (s.points.empty()) throw std::invalid_argument("svg: empty series " + s.name);
  detail::Frame f;
  f.xmin = f.ymin = std::numeric_limits<double>::infinity();
  f.xmax = f.ymax = -std::numeric_limits<double>::infinity();
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      f.xmin = std::min(f.xmin, x);
      f.xmax = std::max(f.xmax, x);
      f.ymin = std::min(f.ymin, y);
      f.ymax = std::max(f.ymax, y);
    }
  detail::expand_range(f.xmin, f.xmax);
  detail::expand_range(f.ymin, f.ymax);

  std::string out =
      "<svg xmlns='http://www.w3.org/2000/svg' width='860' height='470' "
      "viewBox='0 0 860 470'>\n<rect width='860' height='470' fill='white'/>\n";
  out += "<text x='430' y='24' font-size='15' text-anchor='middle'>" + title + "</text>\n";
  out += detail::axes(f, xlabel, ylabel);
  for (std::size_t s = 0; s < series.size(); ++s) {
    std::string pts;
    for (const auto& [x, y] : series[s].points)
      pts += detail::num(f.px(x)) + "," + detail::num(f.py(y)) + " ";
    out += "<polyline fill='none' stroke='" + std::string(detail::palette(s)) +
           "' stroke-width='1.8' points='" + pts + "'/>\n";
    for (const auto& [x, y] : series[s].points)
      out += "<circle cx='" + detail::num(f.px(x)) + "' cy='" + detail::num(f.py(y)) +
             "' r='2.6' fill='" + detail::palette(s) + "'/>\n";
  }
  out += detail::legend(f, series);
  out += "</svg>\n";
  return out;
}

// Grouped bar chart: one group per label, one bar per series.
inline std::string render_bars(const std::string& title, const std::vector<std::string>& labels,
                               const std::vector<Series>& series) {
  if (series.empty() || labels.empty())
    throw std::invalid_argument("svg: nothing to plot");
  for (const auto& s : series)
    if (s.points.size() != labels.size())
      throw std::invalid_argument("svg: series length does not match labels");
  detail::Frame f;
  f.xmin = 0;
  f.xmax = static_cast<double>(labels.size());
  f.ymin = 0;
  f.ymax = -std::numeric_limits<double>::infinity();
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) f.ymax = std::max(f.ymax, y);
  if (!(f.ymax > 0)) f.ymax = 1.0;
  f.ymax *= 1.08;

  std::string out =
      "<svg xmlns='http://www.w3.org/2000/svg' width='860' height='470' "
      "viewBox='0 0 860 470'>\n<rect width='860' height='470' fill='white'/>\n";
  out += "<text x='430' y='24' font-size='15' text-anchor='middle'>" + title + "</text>\n";
  out += detail::axes(f, "", "");
  const double group_w = f.width / static_cast<double>(labels.size());
  const double bar_w = group_w * 0.8 / static_cast<double>(series.size());
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double v = series[s].points[i].second;
      const double x = f.x0 + group_w * static_cast<double>(i) + group_w * 0.1 +
                       bar_w * static_cast<double>(s);
      const double y = f.py(std::max(0.0, v));
      const double h = f.y0 + f.height - y;
      out += "<rect x='" + detail::num(x) + "' y='" + detail::num(y) + "' width='" +
             detail::num(bar_w * 0.92) + "' height='" + detail::num(std::max(0.0, h)) +
             "' fill='" + detail::palette(s) + "'/>\n";
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i)
    out += "<text x='" + detail::num(f.x0 + group_w * (static_cast<double>(i) + 0.5)) + "' y='" +
           detail::num(f.y0 + f.height + 20) + "' font-size='11' text-anchor='middle'>" +
           labels[i] + "</text>\n";
  out += detail::legend(f, series);
  out += "</svg>\n";
  return out;
}

}  // namespace tsfd::svg
