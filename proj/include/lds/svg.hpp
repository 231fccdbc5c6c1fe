#pragma once

#include <string>
#include <vector>

namespace lds {

// Self-contained SVG line plot: axes, ticks, one polyline. Non-finite
// samples split the line.
std::string svg_line_plot(const std::vector<double>& xs,
                          const std::vector<double>& ys,
                          const std::string& title,
                          const std::string& x_label,
                          const std::string& y_label);

// Grayscale cell map for d=2 fields, row-major n x n.
std::string svg_heatmap(int n, const std::vector<double>& values,
                        const std::string& title);

}  // namespace lds
