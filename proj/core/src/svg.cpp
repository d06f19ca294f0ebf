#include "specktrack/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "specktrack/error.hpp"

namespace specktrack::svg {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string line_chart(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label, int width,
                       int height) {
  if (series.empty()) raise(ErrorCode::InvalidArgument, "line_chart needs at least one series");
  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) {
      raise(ErrorCode::ShapeMismatch, "series '" + s.name + "' has mismatched x/y sizes");
    }
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (x_lo > x_hi) {
    x_lo = 0.0;
    x_hi = 1.0;
  }
  if (y_lo > y_hi) {
    y_lo = 0.0;
    y_hi = 1.0;
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;
  const double pad_y = 0.05 * (y_hi - y_lo);
  y_lo -= pad_y;
  y_hi += pad_y;

  const int ml = 64, mr = 16, mt = 32, mb = 48;
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return mt + ph - (y - y_lo) / (y_hi - y_lo) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(width / 2.0) + "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";

  for (int k = 0; k <= 5; ++k) {
    const double xv = x_lo + (x_hi - x_lo) * k / 5.0;
    const double yv = y_lo + (y_hi - y_lo) * k / 5.0;
    out += "<line x1=\"" + num(px(xv)) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(px(xv)) +
           "\" y2=\"" + num(mt + ph) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out += "<line x1=\"" + num(ml) + "\" y1=\"" + num(py(yv)) + "\" x2=\"" + num(ml + pw) +
           "\" y2=\"" + num(py(yv)) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(mt + ph + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + num(xv) +
           "</text>\n";
    out += "<text x=\"" + num(ml - 6) + "\" y=\"" + num(py(yv) + 3) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + num(yv) +
           "</text>\n";
  }
  out += "<rect x=\"" + num(ml) + "\" y=\"" + num(mt) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"#333333\"/>\n";
  out += "<text x=\"" + num(ml + pw / 2) + "\" y=\"" + num(height - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + x_label +
         "</text>\n";
  out += "<text x=\"14\" y=\"" + num(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 14 " + num(mt + ph / 2) + ")\">" + y_label + "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % 8];
    std::string points;
    bool open = false;
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        if (open) {
          out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                 "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
          points.clear();
          open = false;
        }
        continue;
      }
      points += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
      open = true;
    }
    if (open) {
      out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    }
    out += "<text x=\"" + num(ml + pw - 8) + "\" y=\"" + num(mt + 16 + 14 * si) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" +
           color + "\">" + s.name + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string rose_grid(const std::vector<std::vector<int64_t>>& histograms,
                      const std::vector<std::string>& titles, int bins_per_circle,
                      int subplot_size) {
  if (histograms.empty()) raise(ErrorCode::InvalidArgument, "rose_grid needs histograms");
  const int n = static_cast<int>(histograms.size());
  const int cols = std::min(n, 5);
  const int rows = (n + cols - 1) / cols;
  const int s = subplot_size;
  const int width = cols * s, height = rows * (s + 20);

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int p = 0; p < n; ++p) {
    const auto& hist = histograms[p];
    if (static_cast<int>(hist.size()) != bins_per_circle) {
      raise(ErrorCode::ShapeMismatch, "histogram row size does not match bins_per_circle");
    }
    const double cx = (p % cols) * s + s / 2.0;
    const double cy = (p / cols) * (s + 20) + s / 2.0 + 16;
    const double rmax = s / 2.0 - 12;
    int64_t peak = 1;
    for (int64_t v : hist) peak = std::max(peak, v);

    out += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(rmax) +
           "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
    for (int b = 0; b < bins_per_circle; ++b) {
      if (hist[b] == 0) continue;
      const double r = rmax * std::sqrt(static_cast<double>(hist[b]) / peak);
      const double a0 = -M_PI + 2.0 * M_PI * b / bins_per_circle;
      const double a1 = -M_PI + 2.0 * M_PI * (b + 1) / bins_per_circle;
      // angle convention: theta measured as atan2(dy, -dx); screen angle for
      // drawing keeps y pointing down, x = -cos(theta), y = sin(theta)
      const double x0 = cx - r * std::cos(a0), y0 = cy + r * std::sin(a0);
      const double x1 = cx - r * std::cos(a1), y1 = cy + r * std::sin(a1);
      out += "<path d=\"M" + num(cx) + "," + num(cy) + " L" + num(x0) + "," + num(y0) +
             " A" + num(r) + "," + num(r) + " 0 0,1 " + num(x1) + "," + num(y1) +
             " Z\" fill=\"#1f77b4\" fill-opacity=\"0.65\" stroke=\"#1f77b4\"/>\n";
    }
    const std::string title = p < static_cast<int>(titles.size()) ? titles[p] : "";
    out += "<text x=\"" + num(cx) + "\" y=\"" + num(cy - rmax - 6) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + title +
           "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace specktrack::svg
