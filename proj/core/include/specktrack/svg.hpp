#pragma once

#include <string>
#include <vector>

namespace specktrack::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// SVG 1.1 line chart with auto-scaled axes and a small legend. NaN samples
/// break the polyline.
std::string line_chart(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       int width = 640, int height = 400);

/// Grid of polar rose (wedge) histograms, one subplot per phase; counts are
/// the (phase, bin) rows of a phase-stats angle histogram.
std::string rose_grid(const std::vector<std::vector<int64_t>>& histograms,
                      const std::vector<std::string>& titles, int bins_per_circle,
                      int subplot_size = 180);

}  // namespace specktrack::svg
