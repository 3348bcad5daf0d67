#include "swgsim/svg.hpp"

#include <fstream>

#include "swgsim/csv.hpp"
#include "swgsim/errors.hpp"

namespace swg {

SvgCanvas::SvgCanvas(int width_px, int height_px, double x_min, double x_max,
                     double y_min, double y_max)
    : width_px_(width_px),
      height_px_(height_px),
      x_min_(x_min),
      x_max_(x_max),
      y_min_(y_min),
      y_max_(y_max) {}

double SvgCanvas::px(double x) const {
    return (x - x_min_) / (x_max_ - x_min_) * width_px_;
}

double SvgCanvas::py(double y) const {
    // SVG y grows downward.
    return (y_max_ - y) / (y_max_ - y_min_) * height_px_;
}

void SvgCanvas::polyline(const std::vector<std::pair<double, double>>& points,
                         const std::string& stroke, double stroke_width,
                         double opacity) {
    if (points.size() < 2) return;
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
          << format_double(stroke_width) << "\" opacity=\"" << format_double(opacity)
          << "\" points=\"";
    for (const auto& [x, y] : points) {
        body_ << format_double(px(x)) << ',' << format_double(py(y)) << ' ';
    }
    body_ << "\"/>\n";
}

void SvgCanvas::circle(double x, double y, double radius_px, const std::string& fill,
                       double opacity) {
    body_ << "<circle cx=\"" << format_double(px(x)) << "\" cy=\""
          << format_double(py(y)) << "\" r=\"" << format_double(radius_px)
          << "\" fill=\"" << fill << "\" opacity=\"" << format_double(opacity)
          << "\"/>\n";
}

void SvgCanvas::text(double x, double y, const std::string& label, int font_px,
                     const std::string& fill) {
    body_ << "<text x=\"" << format_double(px(x)) << "\" y=\"" << format_double(py(y))
          << "\" font-size=\"" << font_px << "\" font-family=\"sans-serif\" fill=\""
          << fill << "\">" << label << "</text>\n";
}

void SvgCanvas::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_px_
        << "\" height=\"" << height_px_ << "\" viewBox=\"0 0 " << width_px_ << ' '
        << height_px_ << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
}

}  // namespace swg
