#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "iwave/fourier.hpp"

namespace iw {

using Vec2 = Eigen::Vector2d;
using CVec2 = Eigen::Vector2cd;
using Mat2 = Eigen::Matrix2d;
using CMat2 = Eigen::Matrix2cd;

enum class Sign : int { Plus = 1, Minus = -1 };
inline int sgn(Sign s) { return static_cast<int>(s); }
inline Sign other(Sign s) { return s == Sign::Plus ? Sign::Minus : Sign::Plus; }
inline int idx(Sign s) { return s == Sign::Plus ? 0 : 1; }
inline const char* name(Sign s) { return s == Sign::Plus ? "+" : "-"; }

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fourier coefficients use the packed layout [a0, a1, b1, a2, b2, ...] of TrigSeries.
struct DomainSpec {
    std::vector<double> fourier_x;
    std::vector<double> fourier_y;
    double rotation = 0.0;   // radians, applied after evaluation
    double lambda = 0.7071067811865476;
    double analyticity_radius = 0.15;  // turns
};

// Validated domain with precomputed (rotated) series and the level functions l^+-(z(t)).
class Domain {
public:
    explicit Domain(DomainSpec spec);

    const DomainSpec& spec() const { return spec_; }
    double lambda() const { return spec_.lambda; }

    Vec2 z(double t, int order = 0) const;
    CVec2 z(cplx t, int order = 0) const;
    // out[m] = z^{(m)}(t), m <= max_order
    void z_all(double t, int max_order, Vec2* out) const;
    void z_all(cplx t, int max_order, CVec2* out) const;

    const TrigSeries& xs() const { return x_; }
    const TrigSeries& ys() const { return y_; }
    const TrigSeries& level(Sign s) const { return level_[idx(s)]; }

    double area() const { return area_; }
    Vec2 centroid() const { return centroid_; }

private:
    DomainSpec spec_;
    TrigSeries x_, y_;
    std::array<TrigSeries, 2> level_;
    double area_ = 0.0;
    Vec2 centroid_ = Vec2::Zero();
};

// The boundary evaluation operation on a raw spec (validates the spec each call).
CVec2 eval_boundary(const DomainSpec& spec, cplx theta, int order);

// l_omega^sign(x) = sign*x1/omega + x2/sqrt(1-omega^2), principal sqrt; requires Re(1-omega^2) > 0.
cplx linear_form(cplx omega, Sign s, const CVec2& x);
double linear_form(double lambda, Sign s, const Vec2& x);
// d/domega of l_omega^sign(x)
cplx linear_form_domega(cplx omega, Sign s, const CVec2& x);
// L_lambda^sign = (sign*lambda, sqrt(1-lambda^2)) / 2
Vec2 lvec(double lambda, Sign s);
CVec2 lvec(cplx omega, Sign s);

struct CriticalPoint {
    double theta = 0.0;
    double value = 0.0;   // l(z(theta))
    double d1 = 0.0;      // residual derivative after polishing
    double d2 = 0.0;      // second derivative (Morse coefficient times 2)
};

struct CharacteristicSet {
    std::array<std::vector<CriticalPoint>, 2> points;  // [0] = +, [1] = -
    double margin = 0.0;       // threshold used on |d2|
    double min_abs_d2 = 0.0;   // smallest |d2| found
    bool verdict = false;
    std::vector<double> offending;
    std::string reason;
    const std::vector<CriticalPoint>& of(Sign s) const { return points[idx(s)]; }
};

// Critical points of t -> l^sign(z(t)) via sign-change bracketing of the derivative on a
// uniform grid, polished by safeguarded Newton to 1e-12. A point is nondegenerate when
// |d2| > rel_margin * max|d2|.
CharacteristicSet check_lambda_simple(const Domain& dom, int grid_n = 4096, double rel_margin = 1e-8);

DomainSpec preset_circle(double lambda);
DomainSpec preset_ellipse(double a, double b, double lambda);
// 64-mode fit of x^4 + y^4 = 1 rotated counterclockwise by `rot`; fit residual
// max | |x|^4 + |y|^4 - 1 | over a fine grid is stored in *residual when given.
DomainSpec preset_superellipse4(double rot, double lambda, int modes = 64, double* residual = nullptr);
// Parses "circle", "ellipse(a,b)", "superellipse4", "superellipse4(rot)".
DomainSpec preset_by_name(const std::string& name, double lambda);

// Reparametrization t -> t + c of the boundary.
DomainSpec shifted(const DomainSpec& spec, double c);

}  // namespace iw
