#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cvsw/timestepper.hpp"

namespace cvsw::app {

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Box {
  double x0, y0, w, h;
};

/// Polyline of (xs, ys) mapped from [xmin,xmax] x [ymin,ymax] into the box.
inline std::string polyline(const std::vector<double>& xs, const std::vector<double>& ys, double xmin, double xmax,
                            double ymin, double ymax, const Box& b, const std::string& color) {
  std::ostringstream s;
  s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
  const double dx = xmax > xmin ? xmax - xmin : 1.0;
  const double dy = ymax > ymin ? ymax - ymin : 1.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(ys[i])) continue;
    const double px = b.x0 + (xs[i] - xmin) / dx * b.w;
    const double py = b.y0 + b.h - (ys[i] - ymin) / dy * b.h;
    s << num(px) << ',' << num(py) << ' ';
  }
  s << "\"/>\n";
  return s.str();
}

inline std::string frame(const Box& b, const std::string& title, double ymin, double ymax) {
  std::ostringstream s;
  s << "<rect x=\"" << num(b.x0) << "\" y=\"" << num(b.y0) << "\" width=\"" << num(b.w) << "\" height=\"" << num(b.h)
    << "\" fill=\"none\" stroke=\"#888\"/>\n";
  s << "<text x=\"" << num(b.x0) << "\" y=\"" << num(b.y0 - 6) << "\" font-size=\"12\">" << escape(title)
    << "</text>\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", ymax);
  s << "<text x=\"" << num(b.x0 + b.w + 4) << "\" y=\"" << num(b.y0 + 10) << "\" font-size=\"10\">" << buf
    << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.3g", ymin);
  s << "<text x=\"" << num(b.x0 + b.w + 4) << "\" y=\"" << num(b.y0 + b.h) << "\" font-size=\"10\">" << buf
    << "</text>\n";
  return s.str();
}

inline std::pair<double, double> finite_range(const std::vector<double>& v) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : v) {
    if (!std::isfinite(x)) continue;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (!(lo <= hi)) return {0.0, 1.0};
  if (lo == hi) return {lo - 0.5, hi + 0.5};
  return {lo, hi};
}

}  // namespace detail

/// Waterfall of u(x, t): each snapshot drawn over x in [0, 2pi), offset upward with t.
inline std::string waterfall_svg(const RunOutcome& out) {
  const double width = 720, height = 540;
  const detail::Box box{60, 30, 600, 480};
  std::vector<std::vector<double>> us;
  double umin = std::numeric_limits<double>::infinity(), umax = -umin;
  for (const Snapshot& s : out.trajectory) {
    const Field u = s.state.velocity();
    us.emplace_back(u.values().begin(), u.values().end());
    const auto [lo, hi] = detail::finite_range(us.back());
    umin = std::min(umin, lo);
    umax = std::max(umax, hi);
  }
  const double span = umax > umin ? umax - umin : 1.0;
  const double count = static_cast<double>(std::max<std::size_t>(out.trajectory.size(), 1));
  // Each trace occupies span, offsets spread the traces over three spans.
  const double step = count > 1 ? 3.0 * span / (count - 1) : 0.0;
  const double ymin = umin, ymax = umax + step * (count - 1);

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << detail::frame(box, "u(x, t) waterfall, x in [0, 2pi), later snapshots higher", ymin, ymax);
  for (std::size_t i = 0; i < out.trajectory.size(); ++i) {
    const auto xs = out.trajectory[i].state.grid().nodes();
    std::vector<double> ys = us[i];
    for (double& y : ys) y += step * static_cast<double>(i);
    s << detail::polyline(xs, ys, 0.0, 2.0 * std::numbers::pi, ymin, ymax, box, "#1f4e9c");
  }
  s << "</svg>\n";
  return s.str();
}

/// Stacked traces of the diagnostics against t.
inline std::string diagnostics_svg(const RunOutcome& out) {
  struct Panel {
    std::string title;
    std::function<double(const DiagnosticsRecord&)> value;
  };
  const double e0 = out.diagnostics.empty() ? 1.0 : out.diagnostics.front().energy_a2;
  const double m0 = out.diagnostics.empty() ? 0.0 : out.diagnostics.front().mean_u;
  const std::vector<Panel> panels{
      {"energy_a2 relative drift", [e0](const DiagnosticsRecord& r) { return e0 != 0.0 ? (r.energy_a2 - e0) / e0 : r.energy_a2; }},
      {"mean_u drift", [m0](const DiagnosticsRecord& r) { return r.mean_u - m0; }},
      {"max |u_x|", [](const DiagnosticsRecord& r) { return r.max_ux; }},
      {"min rho", [](const DiagnosticsRecord& r) { return r.min_rho; }},
  };
  const double panel_h = 120, gap = 40, width = 720;
  const double height = 30 + panels.size() * (panel_h + gap);
  std::vector<double> ts;
  for (const auto& r : out.diagnostics) ts.push_back(r.t);
  const auto [tmin, tmax] = detail::finite_range(ts);

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const detail::Box box{60, 30 + p * (panel_h + gap), 600, panel_h};
    std::vector<double> ys;
    for (const auto& r : out.diagnostics) ys.push_back(panels[p].value(r));
    const auto [lo, hi] = detail::finite_range(ys);
    s << detail::frame(box, panels[p].title + " vs t", lo, hi);
    s << detail::polyline(ts, ys, tmin, tmax, lo, hi, box, "#a33");
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace cvsw::app
