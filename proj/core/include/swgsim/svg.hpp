#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

namespace swg {

// Minimal SVG canvas mapping a data-space rectangle onto a pixel viewport.
// Just enough for scatter/trajectory plots; CSVs remain the data contract.
class SvgCanvas {
public:
    SvgCanvas(int width_px, int height_px, double x_min, double x_max, double y_min,
              double y_max);

    void polyline(const std::vector<std::pair<double, double>>& points,
                  const std::string& stroke, double stroke_width = 1.0,
                  double opacity = 1.0);
    void circle(double x, double y, double radius_px, const std::string& fill,
                double opacity = 1.0);
    void text(double x, double y, const std::string& label, int font_px = 12,
              const std::string& fill = "#333333");

    void save(const std::filesystem::path& path) const;

private:
    double px(double x) const;
    double py(double y) const;

    int width_px_;
    int height_px_;
    double x_min_, x_max_, y_min_, y_max_;
    std::ostringstream body_;
};

}  // namespace swg
