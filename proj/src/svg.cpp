#include "lds/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lds {

namespace {

constexpr int kWidth = 720, kHeight = 480;
constexpr int kLeft = 70, kRight = 24, kTop = 40, kBottom = 56;

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

struct Scale {
  double lo, hi;
  int pix_lo, pix_hi;
  double at(double v) const {
    double t = (v - lo) / (hi - lo);
    return pix_lo + t * (pix_hi - pix_lo);
  }
};

std::vector<double> ticks(double lo, double hi) {
  double span = hi - lo;
  double raw = span / 5.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step)
    out.push_back(v);
  return out;
}

}  // namespace

std::string svg_line_plot(const std::vector<double>& xs,
                          const std::vector<double>& ys,
                          const std::string& title,
                          const std::string& x_label,
                          const std::string& y_label) {
  double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(ys[i])) continue;
    xlo = std::min(xlo, xs[i]);
    xhi = std::max(xhi, xs[i]);
    ylo = std::min(ylo, ys[i]);
    yhi = std::max(yhi, ys[i]);
  }
  if (!(xlo < xhi)) {
    xlo -= 1.0;
    xhi += 1.0;
  }
  if (!(ylo < yhi)) {
    ylo -= 1.0;
    yhi += 1.0;
  }
  double pad = 0.05 * (yhi - ylo);
  ylo -= pad;
  yhi += pad;

  Scale sx{xlo, xhi, kLeft, kWidth - kRight};
  Scale sy{ylo, yhi, kHeight - kBottom, kTop};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";

  for (double t : ticks(xlo, xhi)) {
    double px = sx.at(t);
    svg << "<line x1=\"" << num(px) << "\" y1=\"" << kHeight - kBottom
        << "\" x2=\"" << num(px) << "\" y2=\"" << kHeight - kBottom + 5
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(px) << "\" y=\"" << kHeight - kBottom + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << num(t) << "</text>\n";
  }
  for (double t : ticks(ylo, yhi)) {
    double py = sy.at(t);
    svg << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(py) << "\" x2=\""
        << kLeft << "\" y2=\"" << num(py) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(py + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << num(t) << "</text>\n";
  }
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
      << kWidth - kRight << "\" y2=\"" << kHeight - kBottom
      << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\""
      << kHeight - 12 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"13\">" << x_label << "</text>\n";
  svg << "<text x=\"18\" y=\"" << (kTop + kHeight - kBottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << (kTop + kHeight - kBottom) / 2 << ")\">"
      << y_label << "</text>\n";

  bool open = false;
  std::ostringstream path;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(ys[i])) {
      open = false;
      continue;
    }
    path << (open ? " L " : " M ") << num(sx.at(xs[i])) << " " << num(sy.at(ys[i]));
    open = true;
    svg << "<circle cx=\"" << num(sx.at(xs[i])) << "\" cy=\"" << num(sy.at(ys[i]))
        << "\" r=\"2.5\" fill=\"#1f4e79\"/>\n";
  }
  svg << "<path d=\"" << path.str()
      << "\" fill=\"none\" stroke=\"#1f4e79\" stroke-width=\"1.5\"/>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string svg_heatmap(int n, const std::vector<double>& values,
                        const std::string& title) {
  double lo = 1e300, hi = -1e300;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo < hi)) hi = lo + 1.0;
  const int cell = std::max(1, 512 / n);
  const int size = cell * n;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size
      << "\" height=\"" << size + 30 << "\">\n";
  svg << "<text x=\"" << size / 2 << "\" y=\"18\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      double t = (values[static_cast<std::size_t>(j) * n + i] - lo) / (hi - lo);
      int shade = static_cast<int>(255.0 * t);
      svg << "<rect x=\"" << i * cell << "\" y=\"" << 30 + (n - 1 - j) * cell
          << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"rgb("
          << shade << "," << shade << "," << shade << ")\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace lds
