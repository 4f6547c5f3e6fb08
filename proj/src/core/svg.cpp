#include "core/svg.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "core/errors.hpp"

namespace stm {

namespace {

constexpr double kW = 640, kH = 480;
constexpr double kMl = 70, kMr = 20, kMt = 40, kMb = 50;

}  // namespace

void write_svg_plot(const std::string& path, const std::vector<SvgSeries>& series,
                    const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, bool logx, bool logy) {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      double xv = s.x[i], yv = s.y[i];
      if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
      if ((logx && xv <= 0) || (logy && yv <= 0)) continue;
      if (logx) xv = std::log10(xv);
      if (logy) yv = std::log10(yv);
      x_lo = std::min(x_lo, xv);
      x_hi = std::max(x_hi, xv);
      y_lo = std::min(y_lo, yv);
      y_hi = std::max(y_hi, yv);
    }
  }
  if (!(x_lo <= x_hi) || !(y_lo <= y_hi))
    throw InvalidArgument("svg: nothing to plot");
  if (x_lo == x_hi) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_lo == y_hi) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  auto px = [&](double v) {
    if (logx) v = std::log10(v);
    return kMl + (v - x_lo) / (x_hi - x_lo) * (kW - kMl - kMr);
  };
  auto py = [&](double v) {
    if (logy) v = std::log10(v);
    return kH - kMb - (v - y_lo) / (y_hi - y_lo) * (kH - kMt - kMb);
  };

  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path);
  std::fprintf(f,
               "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
               "viewBox=\"0 0 %g %g\" font-family=\"sans-serif\" font-size=\"13\">\n",
               kW, kH, kW, kH);
  std::fprintf(f, "<rect width=\"%g\" height=\"%g\" fill=\"white\"/>\n", kW, kH);
  std::fprintf(f, "<text x=\"%g\" y=\"22\" text-anchor=\"middle\">%s</text>\n", kW / 2,
               title.c_str());
  std::fprintf(f,
               "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" "
               "stroke=\"#444\"/>\n",
               kMl, kMt, kW - kMl - kMr, kH - kMt - kMb);
  auto fmt_lim = [&](double v, bool lg) { return lg ? std::pow(10.0, v) : v; };
  std::fprintf(f, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%s%s</text>\n", kW / 2,
               kH - 12, xlabel.c_str(), logx ? " (log)" : "");
  std::fprintf(f,
               "<text x=\"16\" y=\"%g\" text-anchor=\"middle\" "
               "transform=\"rotate(-90 16 %g)\">%s%s</text>\n",
               kH / 2, kH / 2, ylabel.c_str(), logy ? " (log)" : "");
  std::fprintf(f, "<text x=\"%g\" y=\"%g\" text-anchor=\"start\">%.3g</text>\n", kMl,
               kH - kMb + 16, fmt_lim(x_lo, logx));
  std::fprintf(f, "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.3g</text>\n", kW - kMr,
               kH - kMb + 16, fmt_lim(x_hi, logx));
  std::fprintf(f, "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.3g</text>\n", kMl - 4,
               kH - kMb, fmt_lim(y_lo, logy));
  std::fprintf(f, "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.3g</text>\n", kMl - 4,
               kMt + 10, fmt_lim(y_hi, logy));

  for (const auto& s : series) {
    std::fprintf(f, "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\" points=\"",
                 s.color.c_str());
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      const double xv = s.x[i], yv = s.y[i];
      if (!std::isfinite(xv) || !std::isfinite(yv)) continue;
      if ((logx && xv <= 0) || (logy && yv <= 0)) continue;
      std::fprintf(f, "%.2f,%.2f ", px(xv), py(yv));
    }
    std::fprintf(f, "\"/>\n");
  }
  std::fprintf(f, "</svg>\n");
  if (std::fclose(f) != 0) throw IoError("write failed: " + path);
}

}  // namespace stm
