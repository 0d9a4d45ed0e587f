#include "iwave/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace iw {

std::string fmt_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void CsvTable::add(const std::vector<double>& row) {
    if (row.size() != header_.size()) throw std::invalid_argument("CsvTable: row width does not match header");
    rows_.push_back(row);
}

std::string CsvTable::str() const {
    std::string out;
    for (size_t k = 0; k < header_.size(); ++k) out += (k ? "," : "") + header_[k];
    out += '\n';
    for (const auto& r : rows_) {
        for (size_t k = 0; k < r.size(); ++k) out += (k ? "," : "") + fmt_double(r[k]);
        out += '\n';
    }
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json read_json(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    return Json::parse(f);
}

std::string color_ramp(double t) {
    if (!std::isfinite(t)) t = 0.0;
    t = std::clamp(t, 0.0, 1.0);
    // piecewise-linear through a few viridis stops
    static const double stops[5][3] = {
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    const double s = t * 4.0;
    const int k = std::min(3, static_cast<int>(s));
    const double f = s - k;
    char buf[8];
    int c[3];
    for (int i = 0; i < 3; ++i) c[i] = static_cast<int>(std::lround(stops[k][i] + f * (stops[k + 1][i] - stops[k][i])));
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
    return buf;
}

SvgCanvas::SvgCanvas(double xmin, double xmax, double ymin, double ymax, int width, int height)
    : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax), w_(width), h_(height) {}

double SvgCanvas::px(double x) const { return (x - xmin_) / (xmax_ - xmin_) * w_; }
double SvgCanvas::py(double y) const { return (ymax_ - y) / (ymax_ - ymin_) * h_; }

namespace {
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}
}  // namespace

void SvgCanvas::polyline(const std::vector<Vec2>& pts, const std::string& stroke, double width, bool closed) {
    std::string p;
    for (const Vec2& q : pts) p += num(px(q(0))) + "," + num(py(q(1))) + " ";
    body_ += std::string(closed ? "<polygon" : "<polyline") + " points=\"" + p + "\" fill=\"none\" stroke=\"" +
             stroke + "\" stroke-width=\"" + num(width) + "\"/>\n";
}

void SvgCanvas::circle(const Vec2& c, double r_px, const std::string& fill) {
    body_ += "<circle cx=\"" + num(px(c(0))) + "\" cy=\"" + num(py(c(1))) + "\" r=\"" + num(r_px) + "\" fill=\"" +
             fill + "\"/>\n";
}

void SvgCanvas::line(const Vec2& a, const Vec2& b, const std::string& stroke, double width) {
    body_ += "<line x1=\"" + num(px(a(0))) + "\" y1=\"" + num(py(a(1))) + "\" x2=\"" + num(px(b(0))) + "\" y2=\"" +
             num(py(b(1))) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"/>\n";
}

void SvgCanvas::text(const Vec2& at, const std::string& s, int size) {
    body_ += "<text x=\"" + num(px(at(0))) + "\" y=\"" + num(py(at(1))) + "\" font-size=\"" + std::to_string(size) +
             "\" font-family=\"sans-serif\">" + s + "</text>\n";
}

void SvgCanvas::heatmap(const std::vector<double>& values, int nx, int ny, double x0, double x1, double y0,
                        double y1) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : values)
        if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
    const double dx = (x1 - x0) / nx, dy = (y1 - y0) / ny;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double v = values[static_cast<size_t>(j) * nx + i];
            if (!std::isfinite(v)) continue;
            const double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
            const double X = px(x0 + i * dx), Y = py(y0 + (j + 1) * dy);
            body_ += "<rect x=\"" + num(X) + "\" y=\"" + num(Y) + "\" width=\"" + num(px(x0 + (i + 1) * dx) - X) +
                     "\" height=\"" + num(py(y0 + j * dy) - Y) + "\" fill=\"" + color_ramp(t) + "\"/>\n";
        }
}

void SvgCanvas::scatter(const std::vector<Vec2>& pts, const std::vector<double>& values, double size_px) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : values)
        if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
    for (size_t k = 0; k < pts.size(); ++k) {
        if (!std::isfinite(values[k])) continue;
        const double t = hi > lo ? (values[k] - lo) / (hi - lo) : 0.5;
        body_ += "<rect x=\"" + num(px(pts[k](0)) - size_px / 2) + "\" y=\"" + num(py(pts[k](1)) - size_px / 2) +
                 "\" width=\"" + num(size_px) + "\" height=\"" + num(size_px) + "\" fill=\"" + color_ramp(t) + "\"/>\n";
    }
}

std::string SvgCanvas::str() const {
    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w_ << "\" height=\"" << h_
      << "\" viewBox=\"0 0 " << w_ << " " << h_ << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << body_ << "</svg>\n";
    return o.str();
}

void SvgCanvas::write(const std::filesystem::path& path) const { write_text(path, str()); }

}  // namespace iw
