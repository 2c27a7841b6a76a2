#include "nvgrad/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nvgrad/error.hpp"

namespace nvgrad::svg {

namespace {

constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 80, kRight = 30, kTop = 40, kBottom = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Round tick positions covering [lo, hi].
std::vector<double> ticks(double lo, double hi, int target = 6) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  return out;
}

std::string header(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

struct Frame {
  double x_lo, x_hi, y_lo, y_hi;
  double left, top, width, height;
  double px(double x) const { return left + (x - x_lo) / (x_hi - x_lo) * width; }
  double py(double y) const { return top + height - (y - y_lo) / (y_hi - y_lo) * height; }
};

using Ticks = std::vector<std::pair<double, std::string>>;

Ticks numeric_ticks(double lo, double hi) {
  Ticks out;
  for (double t : ticks(lo, hi)) out.emplace_back(t, num(t));
  return out;
}

Ticks category_ticks(const std::vector<std::string>& labels) {
  Ticks out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.emplace_back(static_cast<double>(i), labels[i]);
  return out;
}

void draw_axes(std::ostringstream& os, const Frame& f, const std::string& title, const std::string& xl,
               const std::string& yl, const Ticks& xt, const Ticks& yt) {
  os << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\"" << num(f.width)
     << "\" height=\"" << num(f.height) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (const auto& [t, text] : xt) {
    const double x = f.px(t);
    os << "<line x1=\"" << num(x) << "\" y1=\"" << num(f.top + f.height) << "\" x2=\"" << num(x)
       << "\" y2=\"" << num(f.top + f.height + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(x) << "\" y=\"" << num(f.top + f.height + 18)
       << "\" text-anchor=\"middle\">" << escape(text) << "</text>\n";
  }
  for (const auto& [t, text] : yt) {
    const double y = f.py(t);
    os << "<line x1=\"" << num(f.left - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(f.left)
       << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(f.left - 8) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
       << escape(text) << "</text>\n";
  }
  os << "<text x=\"" << num(f.left + f.width / 2) << "\" y=\"" << num(f.top - 14)
     << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  os << "<text x=\"" << num(f.left + f.width / 2) << "\" y=\"" << num(f.top + f.height + 42)
     << "\" text-anchor=\"middle\">" << escape(xl) << "</text>\n";
  os << "<text transform=\"translate(" << num(18) << "," << num(f.top + f.height / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(yl) << "</text>\n";
}

std::array<int, 3> colour(double t, bool diverging) {
  t = std::clamp(t, 0.0, 1.0);
  if (diverging) {
    // blue - white - red
    if (t < 0.5) {
      const double s = t / 0.5;
      return {static_cast<int>(40 + 215 * s), static_cast<int>(70 + 185 * s), 255};
    }
    const double s = (t - 0.5) / 0.5;
    return {255, static_cast<int>(255 - 205 * s), static_cast<int>(255 - 215 * s)};
  }
  // dark blue to yellow
  return {static_cast<int>(30 + 220 * t), static_cast<int>(30 + 200 * t), static_cast<int>(120 - 90 * t)};
}

std::string rgb(const std::array<int, 3>& c) {
  return "rgb(" + std::to_string(c[0]) + "," + std::to_string(c[1]) + "," + std::to_string(c[2]) + ")";
}

}  // namespace

std::pair<double, std::string> length_unit(double span) {
  return std::abs(span) < 2e-6 ? std::pair{1e9, std::string("nm")} : std::pair{1e6, std::string("um")};
}

std::string plot(const std::vector<Series>& series, const Axes& axes) {
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const auto& s : series) {
    if (s.x.size() == 0) continue;
    x_lo = std::min(x_lo, s.x.minCoeff() * axes.x_scale);
    x_hi = std::max(x_hi, s.x.maxCoeff() * axes.x_scale);
    y_lo = std::min(y_lo, s.y.minCoeff() * axes.y_scale);
    y_hi = std::max(y_hi, s.y.maxCoeff() * axes.y_scale);
  }
  if (!std::isfinite(x_lo)) x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  if (x_hi == x_lo) x_hi = x_lo + 1;
  if (y_hi == y_lo) y_lo -= 0.5, y_hi += 0.5;
  const double pad = 0.05 * (y_hi - y_lo);
  const Frame f{x_lo, x_hi, y_lo - pad, y_hi + pad, kLeft, kTop, kWidth - kLeft - kRight,
                kHeight - kTop - kBottom};

  std::ostringstream os;
  os << header(kWidth, kHeight);
  draw_axes(os, f, axes.title, axes.x_label, axes.y_label, numeric_ticks(f.x_lo, f.x_hi),
            numeric_ticks(f.y_lo, f.y_hi));
  int row = 0;
  for (const auto& s : series) {
    if (s.markers) {
      for (Eigen::Index i = 0; i < s.x.size(); ++i)
        os << "<circle cx=\"" << num(f.px(s.x(i) * axes.x_scale)) << "\" cy=\""
           << num(f.py(s.y(i) * axes.y_scale)) << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    } else {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (Eigen::Index i = 0; i < s.x.size(); ++i)
        os << num(f.px(s.x(i) * axes.x_scale)) << ',' << num(f.py(s.y(i) * axes.y_scale)) << ' ';
      os << "\"/>\n";
    }
    if (!s.label.empty()) {
      const double ly = kTop + 14 + 16 * row++;
      os << "<rect x=\"" << num(kWidth - kRight - 150) << "\" y=\"" << num(ly - 9)
         << "\" width=\"10\" height=\"10\" fill=\"" << s.color << "\"/>\n";
      os << "<text x=\"" << num(kWidth - kRight - 135) << "\" y=\"" << num(ly) << "\">"
         << escape(s.label) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string heatmap(const Heatmap& map) {
  const Eigen::Index nx = map.values.rows(), ny = map.values.cols();
  detail::require(nx > 0 && ny > 0, "heatmap: empty data");
  const bool masked = map.mask.size() == map.values.size();
  double lo = INFINITY, hi = -INFINITY;
  for (Eigen::Index i = 0; i < nx; ++i)
    for (Eigen::Index j = 0; j < ny; ++j) {
      if ((masked && map.mask(i, j)) || !std::isfinite(map.values(i, j))) continue;
      lo = std::min(lo, map.values(i, j));
      hi = std::max(hi, map.values(i, j));
    }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  const bool diverging = lo < 0 && hi > 0;
  if (diverging) {
    const double m = std::max(-lo, hi);
    lo = -m, hi = m;
  }
  if (hi == lo) hi = lo + 1;

  const bool x_cat = !map.x_categories.empty(), y_cat = !map.y_categories.empty();
  detail::require(!x_cat || static_cast<Eigen::Index>(map.x_categories.size()) == nx,
                  "heatmap: one x category per column");
  detail::require(!y_cat || static_cast<Eigen::Index>(map.y_categories.size()) == ny,
                  "heatmap: one y category per row");
  double xs = 1.0, ys = 1.0, x0 = map.x0, y0 = map.y0, dx = map.dx, dy = map.dy;
  std::string xu, yu;
  if (map.length_axes && !x_cat) std::tie(xs, xu) = length_unit(static_cast<double>(nx) * map.dx);
  if (map.length_axes && !y_cat) std::tie(ys, yu) = length_unit(static_cast<double>(ny) * map.dy);
  if (x_cat) x0 = 0, dx = 1;
  if (y_cat) y0 = 0, dy = 1;
  const double x_lo = (x0 - 0.5 * dx) * xs, x_hi = (x0 + (static_cast<double>(nx) - 0.5) * dx) * xs;
  const double y_lo = (y0 - 0.5 * dy) * ys, y_hi = (y0 + (static_cast<double>(ny) - 0.5) * dy) * ys;
  const double side = kHeight - kTop - kBottom;
  const Frame f{x_lo, x_hi, y_lo, y_hi, kLeft, kTop, side, side};

  std::ostringstream os;
  os << header(kWidth, kHeight);
  const double cw = f.width / static_cast<double>(nx), ch = f.height / static_cast<double>(ny);
  for (Eigen::Index i = 0; i < nx; ++i)
    for (Eigen::Index j = 0; j < ny; ++j) {
      if ((masked && map.mask(i, j)) || !std::isfinite(map.values(i, j))) continue;
      const double t = (map.values(i, j) - lo) / (hi - lo);
      os << "<rect x=\"" << num(f.left + cw * static_cast<double>(i)) << "\" y=\""
         << num(f.top + f.height - ch * static_cast<double>(j + 1)) << "\" width=\"" << num(cw + 0.05)
         << "\" height=\"" << num(ch + 0.05) << "\" fill=\"" << rgb(colour(t, diverging)) << "\"/>\n";
    }
  const auto label = [&](const std::string& l, const std::string& u) { return u.empty() ? l : l + " (" + u + ")"; };
  draw_axes(os, f, map.title, label(map.x_label, xu), label(map.y_label, yu),
            x_cat ? category_ticks(map.x_categories) : numeric_ticks(f.x_lo, f.x_hi),
            y_cat ? category_ticks(map.y_categories) : numeric_ticks(f.y_lo, f.y_hi));

  // Colorbar
  const double bx = f.left + f.width + 30, bw = 18;
  const int steps = 64;
  for (int k = 0; k < steps; ++k) {
    const double t = (k + 0.5) / steps;
    os << "<rect x=\"" << num(bx) << "\" y=\"" << num(f.top + f.height * (1.0 - (k + 1.0) / steps))
       << "\" width=\"" << num(bw) << "\" height=\"" << num(f.height / steps + 0.05) << "\" fill=\""
       << rgb(colour(t, diverging)) << "\"/>\n";
  }
  os << "<rect x=\"" << num(bx) << "\" y=\"" << num(f.top) << "\" width=\"" << num(bw) << "\" height=\""
     << num(f.height) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(lo, hi, 5)) {
    const double y = f.top + f.height * (1.0 - (t - lo) / (hi - lo));
    os << "<text x=\"" << num(bx + bw + 4) << "\" y=\"" << num(y + 4) << "\">" << num(t) << "</text>\n";
  }
  os << "<text transform=\"translate(" << num(bx + bw + 90) << "," << num(f.top + f.height / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(map.value_label) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void save(const std::string& path, const std::string& document) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << document;
  if (!os) throw IoError("write failed for '" + path + "'");
}

}  // namespace nvgrad::svg
