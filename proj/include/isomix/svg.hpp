#pragma once

#include <string>
#include <vector>

#include "isomix/types.hpp"

namespace isomix {

// Minimal static SVG builder: fixed-size canvas, linear data-to-pixel
// mapping, axis frame with ticks.  Enough for the scatter / histogram /
// ribbon / line figures the CLI emits; no interactivity.
class SvgCanvas {
public:
    SvgCanvas(double x_min, double x_max, double y_min, double y_max,
              int width = 640, int height = 480);

    void set_title(const std::string& title);
    void set_labels(const std::string& x_label, const std::string& y_label);

    void circle(double x, double y, double radius, const std::string& color,
                double opacity = 1.0);
    void square(double x, double y, double half_px, const std::string& color);
    void line(double x1, double y1, double x2, double y2, const std::string& color,
              double width = 1.0, double opacity = 1.0);
    void polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                  const std::string& color, double width = 1.5);
    void polygon(const std::vector<double>& xs, const std::vector<double>& ys,
                 const std::string& stroke, const std::string& fill,
                 double fill_opacity);
    // Axis-aligned bar in data coordinates (used for histograms).
    void bar(double x_lo, double x_hi, double y_lo, double y_hi,
             const std::string& color, double opacity = 1.0);
    void label(double x, double y, const std::string& text,
               const std::string& color = "#333333", int font_px = 11);

    std::string finish() const;  // complete SVG document with axes

    // Pixel transforms exposed for callers that need raw placement.
    double px(double x) const;
    double py(double y) const;

private:
    double x_min_, x_max_, y_min_, y_max_;
    int width_, height_;
    double m_left_ = 56, m_right_ = 16, m_top_ = 28, m_bottom_ = 44;
    std::string title_, x_label_, y_label_;
    std::string body_;
};

// Evenly spaced "nice" tick positions covering [lo, hi].
std::vector<double> axis_ticks(double lo, double hi, int target = 6);

// Qualitative color for series i.
std::string series_color(int i);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace isomix
