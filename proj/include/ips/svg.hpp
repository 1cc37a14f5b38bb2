#pragma once
#include <string>
#include <vector>

namespace ips {

struct SvgSeries {
    std::string label;
    std::vector<double> x, y;
};

// Minimal static line chart (axes, legend, one polyline per series).
void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series);

}  // namespace ips
