#include "isomix/svg.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "isomix/csv.hpp"

namespace isomix {

namespace {

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

}  // namespace

SvgCanvas::SvgCanvas(double x_min, double x_max, double y_min, double y_max,
                     int width, int height)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max),
      width_(width), height_(height) {
    if (!(x_max_ > x_min_)) x_max_ = x_min_ + 1.0;
    if (!(y_max_ > y_min_)) y_max_ = y_min_ + 1.0;
    // Pad the data range slightly so points at the extremes stay visible.
    double xpad = 0.04 * (x_max_ - x_min_), ypad = 0.04 * (y_max_ - y_min_);
    x_min_ -= xpad; x_max_ += xpad;
    y_min_ -= ypad; y_max_ += ypad;
}

double SvgCanvas::px(double x) const {
    return m_left_ + (x - x_min_) / (x_max_ - x_min_) *
                         (width_ - m_left_ - m_right_);
}

double SvgCanvas::py(double y) const {
    return height_ - m_bottom_ -
           (y - y_min_) / (y_max_ - y_min_) * (height_ - m_top_ - m_bottom_);
}

void SvgCanvas::set_title(const std::string& title) { title_ = title; }

void SvgCanvas::set_labels(const std::string& x_label, const std::string& y_label) {
    x_label_ = x_label;
    y_label_ = y_label;
}

void SvgCanvas::circle(double x, double y, double radius, const std::string& color,
                       double opacity) {
    body_ += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"" +
             num(radius) + "\" fill=\"" + color + "\" fill-opacity=\"" +
             num(opacity) + "\"/>\n";
}

void SvgCanvas::square(double x, double y, double half_px, const std::string& color) {
    body_ += "<rect x=\"" + num(px(x) - half_px) + "\" y=\"" +
             num(py(y) - half_px) + "\" width=\"" + num(2 * half_px) +
             "\" height=\"" + num(2 * half_px) + "\" fill=\"" + color + "\"/>\n";
}

void SvgCanvas::line(double x1, double y1, double x2, double y2,
                     const std::string& color, double width, double opacity) {
    body_ += "<line x1=\"" + num(px(x1)) + "\" y1=\"" + num(py(y1)) + "\" x2=\"" +
             num(px(x2)) + "\" y2=\"" + num(py(y2)) + "\" stroke=\"" + color +
             "\" stroke-width=\"" + num(width) + "\" stroke-opacity=\"" +
             num(opacity) + "\"/>\n";
}

void SvgCanvas::polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                         const std::string& color, double width) {
    if (xs.size() != ys.size() || xs.empty()) return;
    std::string pts;
    for (std::size_t i = 0; i < xs.size(); ++i)
        pts += num(px(xs[i])) + "," + num(py(ys[i])) + " ";
    body_ += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"" + num(width) + "\"/>\n";
}

void SvgCanvas::polygon(const std::vector<double>& xs, const std::vector<double>& ys,
                        const std::string& stroke, const std::string& fill,
                        double fill_opacity) {
    if (xs.size() != ys.size() || xs.empty()) return;
    std::string pts;
    for (std::size_t i = 0; i < xs.size(); ++i)
        pts += num(px(xs[i])) + "," + num(py(ys[i])) + " ";
    body_ += "<polygon points=\"" + pts + "\" stroke=\"" + stroke + "\" fill=\"" +
             fill + "\" fill-opacity=\"" + num(fill_opacity) + "\"/>\n";
}

void SvgCanvas::bar(double x_lo, double x_hi, double y_lo, double y_hi,
                    const std::string& color, double opacity) {
    double x = px(x_lo), w = px(x_hi) - px(x_lo);
    double y = py(y_hi), h = py(y_lo) - py(y_hi);
    if (w <= 0 || h <= 0) return;
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
             "\" height=\"" + num(h) + "\" fill=\"" + color + "\" fill-opacity=\"" +
             num(opacity) + "\" stroke=\"none\"/>\n";
}

void SvgCanvas::label(double x, double y, const std::string& text,
                      const std::string& color, int font_px) {
    body_ += "<text x=\"" + num(px(x)) + "\" y=\"" + num(py(y)) +
             "\" font-size=\"" + std::to_string(font_px) + "\" fill=\"" + color +
             "\" font-family=\"sans-serif\">" + escape_xml(text) + "</text>\n";
}

std::vector<double> axis_ticks(double lo, double hi, int target) {
    if (!(hi > lo)) return {lo};
    double raw = (hi - lo) / std::max(1, target);
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double mult : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        if (mag * mult >= raw) { step = mag * mult; break; }
    }
    std::vector<double> ticks;
    double first = std::ceil(lo / step) * step;
    for (double t = first; t <= hi + 1e-9 * step; t += step)
        ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return ticks;
}

std::string series_color(int i) {
    static const char* palette[] = {"#1b6ca8", "#d1495b", "#3a7d44", "#e3871e",
                                    "#7d5ba6", "#00798c", "#a05c20", "#5c5c5c"};
    return palette[i % 8];
}

std::string SvgCanvas::finish() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_
        << "\" height=\"" << height_ << "\" viewBox=\"0 0 " << width_ << " "
        << height_ << "\">\n";
    out << "<rect width=\"" << width_ << "\" height=\"" << height_
        << "\" fill=\"white\"/>\n";

    // Frame.
    double x0 = m_left_, x1 = width_ - m_right_;
    double y0 = height_ - m_bottom_, y1 = m_top_;
    out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\""
        << num(x1 - x0) << "\" height=\"" << num(y0 - y1)
        << "\" fill=\"none\" stroke=\"#444444\"/>\n";

    for (double t : axis_ticks(x_min_, x_max_)) {
        double x = px(t);
        out << "<line x1=\"" << num(x) << "\" y1=\"" << num(y0) << "\" x2=\""
            << num(x) << "\" y2=\"" << num(y0 + 4) << "\" stroke=\"#444444\"/>\n";
        out << "<text x=\"" << num(x) << "\" y=\"" << num(y0 + 16)
            << "\" font-size=\"10\" fill=\"#333333\" text-anchor=\"middle\" "
               "font-family=\"sans-serif\">"
            << format_double(t) << "</text>\n";
    }
    for (double t : axis_ticks(y_min_, y_max_)) {
        double y = py(t);
        out << "<line x1=\"" << num(x0 - 4) << "\" y1=\"" << num(y) << "\" x2=\""
            << num(x0) << "\" y2=\"" << num(y) << "\" stroke=\"#444444\"/>\n";
        out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(y + 3)
            << "\" font-size=\"10\" fill=\"#333333\" text-anchor=\"end\" "
               "font-family=\"sans-serif\">"
            << format_double(t) << "</text>\n";
    }

    if (!title_.empty())
        out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(m_top_ - 10)
            << "\" font-size=\"13\" fill=\"#111111\" text-anchor=\"middle\" "
               "font-family=\"sans-serif\">"
            << escape_xml(title_) << "</text>\n";
    if (!x_label_.empty())
        out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\""
            << num(height_ - 10)
            << "\" font-size=\"11\" fill=\"#111111\" text-anchor=\"middle\" "
               "font-family=\"sans-serif\">"
            << escape_xml(x_label_) << "</text>\n";
    if (!y_label_.empty())
        out << "<text x=\"14\" y=\"" << num((y0 + y1) / 2)
            << "\" font-size=\"11\" fill=\"#111111\" text-anchor=\"middle\" "
               "font-family=\"sans-serif\" transform=\"rotate(-90 14 "
            << num((y0 + y1) / 2) << ")\">" << escape_xml(y_label_)
            << "</text>\n";

    out << body_;
    out << "</svg>\n";
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write file: " + path);
    out << content;
    if (!out) fail(ErrorCode::io, "failed writing file: " + path);
}

}  // namespace isomix
