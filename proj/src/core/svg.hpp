#pragma once

#include <string>
#include <vector>

namespace stm {

struct SvgSeries {
  std::vector<double> x, y;
  std::string color = "#1f6fb2";
};

// Minimal line-plot writer, enough to eyeball a curve without leaving the
// terminal workflow. Log axes drop nonpositive values.
void write_svg_plot(const std::string& path, const std::vector<SvgSeries>& series,
                    const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, bool logx, bool logy);

}  // namespace stm
