#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "iwave/geometry.hpp"

namespace iw {

using Json = nlohmann::ordered_json;

// Round-trip exact decimal form of a double (%.17g; "nan", "inf", "-inf" for non-finite values).
std::string fmt_double(double x);

// Header row then one row per record; every value goes through fmt_double.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(const std::vector<double>& row);
    size_t rows() const { return rows_.size(); }
    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);
Json read_json(const std::filesystem::path& path);

// Minimal SVG 1.1 canvas in world coordinates (y up), mapped onto a width x height picture.
class SvgCanvas {
public:
    SvgCanvas(double xmin, double xmax, double ymin, double ymax, int width = 600, int height = 600);
    void polyline(const std::vector<Vec2>& pts, const std::string& stroke, double width = 1.0, bool closed = false);
    void circle(const Vec2& c, double r_px, const std::string& fill);
    void line(const Vec2& a, const Vec2& b, const std::string& stroke, double width = 1.0);
    void text(const Vec2& at, const std::string& s, int size = 12);
    // values on cells of an nx x ny grid covering [x0,x1] x [y0,y1], row-major in y; NaN cells are skipped
    void heatmap(const std::vector<double>& values, int nx, int ny, double x0, double x1, double y0, double y1);
    // scattered samples drawn as small squares coloured by value
    void scatter(const std::vector<Vec2>& pts, const std::vector<double>& values, double size_px);
    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    double px(double x) const;
    double py(double y) const;
    double xmin_, xmax_, ymin_, ymax_;
    int w_, h_;
    std::string body_;
};

// viridis-like ramp for t in [0,1] as "#rrggbb"
std::string color_ramp(double t);

}  // namespace iw
