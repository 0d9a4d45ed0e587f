#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "iwave/billiard.hpp"
#include "iwave/fourier.hpp"
#include "iwave/geometry.hpp"

namespace iw {

struct DeformationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Endpoints of the chord {l^sign = l^sign(x)}; ordered so that l^other(z(down)) <= l^other(z(up)).
struct UpDownPair {
    Sign sign = Sign::Plus;
    double theta_down = 0.0;
    double theta_up = 0.0;
};

struct Tangency {
    double theta;  // characteristic parameter
    double value;  // l(z(theta))
    double alpha;  // (l o z)''(theta) / 2
};

struct XiValue {
    CVec2 xi;
    CMat2 J;                    // D_x Xi
    std::array<cplx, 2> g;      // l^+(Xi), l^-(Xi)
    std::array<bool, 2> morse;  // tangency branch used for g_+, g_-
};

// Xi(tau, .) on the closed domain. The boundary is moved to z(theta + i tau h(theta)); the
// interior is filled by interpolating l^+-(Xi) linearly along the conjugate characteristic
// chords, anchored at the chord endpoints.
class DeformationMap {
public:
    DeformationMap(const Billiard& bil, TrigSeries h, double tau, double seam = 1e-3);

    double tau() const { return tau_; }
    double lambda() const { return lam_; }
    const TrigSeries& h() const { return h_; }
    const Domain& domain() const { return dom_; }
    const Tangency& tangency(Sign s, int k) const { return tang_[idx(s)][k]; }
    DeformationMap with_tau(double tau) const;

    // z(theta + i tau h(theta)) and its theta-derivative; DomainError beyond the analyticity radius.
    CVec2 boundary(double theta) const;
    CVec2 boundary_dtheta(double theta) const;

    bool inside(const Vec2& x, double tol = 1e-12) const;
    UpDownPair updown(Sign s, const Vec2& x) const;
    // the two parameters with l^s(z(theta)) = c, [0] on the increasing arc, [1] on the decreasing one
    std::array<double, 2> level_roots(Sign s, double c) const;

    XiValue eval(const Vec2& x, bool jacobian = true) const;
    CVec2 xi(const Vec2& x) const { return eval(x, false).xi; }

    // l^s(D_{L^-s} Xi) = dg_s along the conjugate chord, i.e. the interpolation slope Q_s
    cplx slope(Sign s, const Vec2& x) const;
    // i l^s(Y_s(up)) / l^-s(z(up) - z(down)) with Y_s from h
    cplx transversality_formula(Sign s, const Vec2& x) const;

    // scaled distance of a level value to the nearest tangency: min(c - fmin, fmax - c) / |alpha|
    double tangency_distance(Sign s, double c) const;

private:
    struct GPart {
        cplx g, dc, ds;  // value and derivatives in (c, o) = (l^s(x), l^-s(x))
        bool morse;
    };
    GPart g_part(Sign s, double c, double o, bool jac) const;
    cplx F(Sign s, double theta) const;
    cplx dF(Sign s, double theta) const;
    double f(Sign s, double theta, int order = 0) const;

    Domain dom_;
    TrigSeries h_;
    double tau_, lam_, mu_, seam_;
    std::array<std::array<Tangency, 2>, 2> tang_;  // [sign][0 = min, 1 = max]
};

// Grid of interior sample points: n x n uniform grid on the bounding box, kept when inside
// with scaled clearance `margin` from the boundary.
std::vector<Vec2> interior_grid(const Domain& dom, int n, double margin = 1e-3);

struct DeformationCertificate {
    double tau = 0.0;
    int grid_n = 0;
    int samples = 0;

    // (a) transversality: T_s = l^s(J L^-s) derivative at tau = 0 by a one-sided difference
    double fd_step = 0.0;
    std::array<double, 2> min_im{};        // min Im T_s
    std::array<double, 2> max_re_ratio{};  // max |Re T_s| / Im T_s
    std::array<double, 2> surrogate_re_ratio{};  // same with the difference taken at tau itself
    double re_ratio_tol = 1e-3;
    bool same_sign = false;
    bool transversal = false;

    // (b) injectivity of x -> l^s(Xi(tau, x)): min over pairs |dg| / |dx|
    std::array<double, 2> injectivity{};
    bool injective = false;

    // (c) total reality: J e1, J e2, i J e1, i J e2 span R^4
    double min_abs_det = 0.0;
    double max_condition = 0.0;
    bool totally_real = false;

    bool pass() const { return transversal && injective && totally_real; }
};

DeformationCertificate verify_deformation(const DeformationMap& dm, int grid_n = 32, double re_ratio_tol = 1e-3);

// 4x4 real matrix with columns J e1, J e2, i J e1, i J e2 (rows Re, Im of both components).
Eigen::Matrix4d realification(const CMat2& J);

// Largest tau <= tau_hi (by bisection, `steps` halvings) passing verify_deformation on a coarse grid.
double max_admissible_tau(const DeformationMap& dm, double tau_hi = 0.1, int grid_n = 16, int steps = 12);

}  // namespace iw
