#include "iwave/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace iw {

namespace {

// Orientation test for segment intersection.
double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool segments_cross(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
    const double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
    const double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace

Domain::Domain(DomainSpec spec) : spec_(std::move(spec)) {
    if (spec_.fourier_x.empty() || spec_.fourier_y.empty())
        throw DomainError("domain: empty Fourier series");
    if (!(spec_.lambda > 0.0 && spec_.lambda < 1.0))
        throw DomainError("domain: lambda must lie in (0,1)");
    if (!(spec_.analyticity_radius > 0.0))
        throw DomainError("domain: analyticity radius must be positive");
    const TrigSeries x0 = TrigSeries::from_packed(spec_.fourier_x);
    const TrigSeries y0 = TrigSeries::from_packed(spec_.fourier_y);
    const double c = std::cos(spec_.rotation), s = std::sin(spec_.rotation);
    x_ = x0 * c + y0 * (-s);
    y_ = x0 * s + y0 * c;
    const double lam = spec_.lambda, mu = std::sqrt(1.0 - lam * lam);
    level_[0] = x_ * (1.0 / lam) + y_ * (1.0 / mu);
    level_[1] = x_ * (-1.0 / lam) + y_ * (1.0 / mu);

    // Trapezoid sums are exact for trigonometric polynomials of degree < n.
    const int n = std::max(4096, 4 * std::max(x_.degree(), y_.degree()) + 8);
    double area2 = 0.0, mx = 0.0, my = 0.0, min_speed = 1e300, max_speed = 0.0;
    std::vector<Vec2> poly;
    poly.reserve(n);
    for (int j = 0; j < n; ++j) {
        const double t = static_cast<double>(j) / n;
        double xv[2], yv[2];
        x_.eval_all(t, 1, xv);
        y_.eval_all(t, 1, yv);
        area2 += xv[0] * yv[1] - yv[0] * xv[1];
        mx += xv[0] * xv[0] * yv[1];
        my += -yv[0] * yv[0] * xv[1];
        const double sp = std::hypot(xv[1], yv[1]);
        min_speed = std::min(min_speed, sp);
        max_speed = std::max(max_speed, sp);
        poly.emplace_back(xv[0], yv[0]);
    }
    area_ = 0.5 * area2 / n;
    if (!(min_speed > 1e-9 * max_speed)) throw DomainError("domain: z is not an immersion (|z'| vanishes)");
    if (!(area_ > 0.0)) throw DomainError("domain: boundary must be positively oriented with positive area");
    centroid_ = Vec2(0.5 * mx / n, 0.5 * my / n) / area_;

    // Pairwise self-intersection check on a coarser polygon.
    const int m = 512;
    std::vector<Vec2> q(m);
    for (int j = 0; j < m; ++j) q[j] = poly[static_cast<std::size_t>(j) * n / m];
    for (int i = 0; i < m; ++i)
        for (int j = i + 2; j < m; ++j) {
            if (i == 0 && j == m - 1) continue;
            if (segments_cross(q[i], q[(i + 1) % m], q[j], q[(j + 1) % m]))
                throw DomainError("domain: boundary curve self-intersects");
        }
}

Vec2 Domain::z(double t, int order) const {
    return {x_.eval(t, order), y_.eval(t, order)};
}

CVec2 Domain::z(cplx t, int order) const {
    if (std::abs(t.imag()) > spec_.analyticity_radius)
        throw DomainError("eval_boundary: |Im theta| exceeds the analyticity radius");
    return {x_.eval(t, order), y_.eval(t, order)};
}

void Domain::z_all(double t, int max_order, Vec2* out) const {
    double xv[8], yv[8];
    x_.eval_all(t, max_order, xv);
    y_.eval_all(t, max_order, yv);
    for (int m = 0; m <= max_order; ++m) out[m] = Vec2(xv[m], yv[m]);
}

void Domain::z_all(cplx t, int max_order, CVec2* out) const {
    if (std::abs(t.imag()) > spec_.analyticity_radius)
        throw DomainError("eval_boundary: |Im theta| exceeds the analyticity radius");
    cplx xv[8], yv[8];
    x_.eval_all(t, max_order, xv);
    y_.eval_all(t, max_order, yv);
    for (int m = 0; m <= max_order; ++m) out[m] = CVec2(xv[m], yv[m]);
}

CVec2 eval_boundary(const DomainSpec& spec, cplx theta, int order) {
    if (order < 0 || order > 2) throw std::invalid_argument("eval_boundary: order must be 0, 1 or 2");
    if (spec.fourier_x.empty() || spec.fourier_y.empty()) throw DomainError("eval_boundary: empty Fourier series");
    if (std::abs(theta.imag()) > spec.analyticity_radius)
        throw DomainError("eval_boundary: |Im theta| exceeds the analyticity radius");
    const TrigSeries xs = TrigSeries::from_packed(spec.fourier_x);
    const TrigSeries ys = TrigSeries::from_packed(spec.fourier_y);
    const cplx x = xs.eval(theta, order), y = ys.eval(theta, order);
    const double c = std::cos(spec.rotation), s = std::sin(spec.rotation);
    CVec2 out(c * x - s * y, s * x + c * y);
    if (theta.imag() == 0.0) {
        out(0) = out(0).real();
        out(1) = out(1).real();
    }
    return out;
}

cplx linear_form(cplx omega, Sign s, const CVec2& x) {
    const cplx d = 1.0 - omega * omega;
    if (!(d.real() > 0.0)) throw DomainError("linear_form: branch requires Re(1 - omega^2) > 0");
    return static_cast<double>(sgn(s)) * x(0) / omega + x(1) / std::sqrt(d);
}

double linear_form(double lambda, Sign s, const Vec2& x) {
    const double d = 1.0 - lambda * lambda;
    if (!(d > 0.0)) throw DomainError("linear_form: branch requires Re(1 - omega^2) > 0");
    return sgn(s) * x(0) / lambda + x(1) / std::sqrt(d);
}

cplx linear_form_domega(cplx omega, Sign s, const CVec2& x) {
    const cplx d = 1.0 - omega * omega;
    if (!(d.real() > 0.0)) throw DomainError("linear_form: branch requires Re(1 - omega^2) > 0");
    return -static_cast<double>(sgn(s)) * x(0) / (omega * omega) + x(1) * omega / (d * std::sqrt(d));
}

Vec2 lvec(double lambda, Sign s) {
    return 0.5 * Vec2(sgn(s) * lambda, std::sqrt(1.0 - lambda * lambda));
}

CVec2 lvec(cplx omega, Sign s) {
    return 0.5 * CVec2(static_cast<double>(sgn(s)) * omega, std::sqrt(1.0 - omega * omega));
}

CharacteristicSet check_lambda_simple(const Domain& dom, int grid_n, double rel_margin) {
    CharacteristicSet out;
    std::array<std::vector<CriticalPoint>, 2> found;
    double max_d2 = 0.0;
    std::vector<double> near_zero;
    for (Sign s : {Sign::Plus, Sign::Minus}) {
        const TrigSeries& f = dom.level(s);
        std::vector<double> d1(grid_n), d2(grid_n);
        double max_abs_d1 = 0.0;
        for (int j = 0; j < grid_n; ++j) {
            double v[3];
            f.eval_all(static_cast<double>(j) / grid_n, 2, v);
            d1[j] = v[1];
            d2[j] = v[2];
            max_abs_d1 = std::max(max_abs_d1, std::abs(v[1]));
            max_d2 = std::max(max_d2, std::abs(v[2]));
        }
        for (int j = 0; j < grid_n; ++j) {
            const int jn = (j + 1) % grid_n;
            const double a = d1[j], b = d1[jn];
            const bool sign_change = (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0) || a == 0.0;
            if (!sign_change) {
                // touching minimum of |f'| without a sign change: a degenerate candidate
                const int jp = (j + grid_n - 1) % grid_n;
                if (std::abs(a) < 1e-6 * max_abs_d1 && std::abs(a) <= std::abs(d1[jp]) && std::abs(a) <= std::abs(b) &&
                    (d1[jp] > 0) == (b > 0))
                    near_zero.push_back(static_cast<double>(j) / grid_n);
                continue;
            }
            double lo = static_cast<double>(j) / grid_n, hi = lo + 1.0 / grid_n;
            double flo = a;
            double t = 0.5 * (lo + hi);
            if (a == 0.0) t = lo;
            for (int it = 0; it < 200 && a != 0.0; ++it) {
                double v[3];
                f.eval_all(t, 2, v);
                if (v[1] == 0.0) { lo = hi = t; break; }
                if ((v[1] > 0) == (flo > 0)) { lo = t; flo = v[1]; } else { hi = t; }
                double tn = t - v[1] / v[2];
                if (!(tn > lo && tn < hi) || !std::isfinite(tn)) tn = 0.5 * (lo + hi);
                const double step = std::abs(tn - t);
                t = tn;
                if (step < 1e-15 || hi - lo < 1e-15) break;
            }
            CriticalPoint cp;
            double v[3];
            f.eval_all(t, 2, v);
            cp.theta = t - std::floor(t);
            cp.value = v[0];
            cp.d1 = v[1];
            cp.d2 = v[2];
            found[idx(s)].push_back(cp);
        }
    }
    out.margin = rel_margin * max_d2;
    out.min_abs_d2 = 1e300;
    out.verdict = near_zero.empty();
    out.offending = near_zero;
    std::ostringstream why;
    if (!near_zero.empty()) why << "degenerate critical point candidates without sign change; ";
    for (Sign s : {Sign::Plus, Sign::Minus}) {
        auto& pts = found[idx(s)];
        std::sort(pts.begin(), pts.end(), [](const CriticalPoint& p, const CriticalPoint& q) { return p.theta < q.theta; });
        for (const auto& p : pts) {
            out.min_abs_d2 = std::min(out.min_abs_d2, std::abs(p.d2));
            if (std::abs(p.d2) <= out.margin) {
                out.verdict = false;
                out.offending.push_back(p.theta);
                why << "degenerate critical point of l" << name(s) << " at " << p.theta << "; ";
            }
        }
        if (pts.size() != 2) {
            out.verdict = false;
            for (const auto& p : pts) out.offending.push_back(p.theta);
            why << pts.size() << " critical points of l" << name(s) << " (expected 2); ";
        }
        out.points[idx(s)] = pts;
    }
    out.reason = why.str();
    return out;
}

DomainSpec preset_circle(double lambda) {
    DomainSpec s;
    s.fourier_x = {0.0, 1.0, 0.0};
    s.fourier_y = {0.0, 0.0, 1.0};
    s.lambda = lambda;
    return s;
}

DomainSpec preset_ellipse(double a, double b, double lambda) {
    DomainSpec s;
    s.fourier_x = {0.0, a, 0.0};
    s.fourier_y = {0.0, 0.0, b};
    s.lambda = lambda;
    return s;
}

DomainSpec preset_superellipse4(double rot, double lambda, int modes, double* residual) {
    const int m = std::max(1024, 8 * modes);
    std::vector<double> xs(m), ys(m);
    for (int j = 0; j < m; ++j) {
        const double phi = kTwoPi * j / m;
        const double c = std::cos(phi), s = std::sin(phi);
        const double r = std::pow(c * c * c * c + s * s * s * s, -0.25);
        xs[j] = r * c;
        ys[j] = r * s;
    }
    const TrigSeries fx = TrigSeries::fit(xs, modes);
    const TrigSeries fy = TrigSeries::fit(ys, modes);
    if (residual) {
        double res = 0.0;
        const int nf = 8192;
        for (int j = 0; j < nf; ++j) {
            const double t = static_cast<double>(j) / nf;
            const double x = fx.eval(t), y = fy.eval(t);
            res = std::max(res, std::abs(x * x * x * x + y * y * y * y - 1.0));
        }
        *residual = res;
    }
    DomainSpec s;
    s.fourier_x = fx.packed();
    s.fourier_y = fy.packed();
    s.rotation = rot;
    s.lambda = lambda;
    return s;
}

DomainSpec preset_by_name(const std::string& name_in, double lambda) {
    std::string name;
    for (char ch : name_in)
        if (!std::isspace(static_cast<unsigned char>(ch))) name += ch;
    auto args = [&](const std::string& head) {
        std::vector<double> v;
        if (name.size() <= head.size()) return v;
        if (name[head.size()] != '(' || name.back() != ')') throw std::invalid_argument("bad preset: " + name_in);
        std::stringstream ss(name.substr(head.size() + 1, name.size() - head.size() - 2));
        std::string tok;
        while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
        return v;
    };
    if (name == "circle") return preset_circle(lambda);
    if (name.rfind("ellipse", 0) == 0) {
        auto v = args("ellipse");
        if (v.empty()) v = {2.0, 1.0};
        if (v.size() != 2) throw std::invalid_argument("ellipse preset takes (a,b)");
        return preset_ellipse(v[0], v[1], lambda);
    }
    if (name.rfind("superellipse4", 0) == 0) {
        auto v = args("superellipse4");
        const double rot = v.empty() ? kPi / 10.0 : v[0];
        return preset_superellipse4(rot, lambda);
    }
    throw std::invalid_argument("unknown preset: " + name_in);
}

DomainSpec shifted(const DomainSpec& spec, double c) {
    DomainSpec out = spec;
    out.fourier_x = TrigSeries::from_packed(spec.fourier_x).shifted(c).packed();
    out.fourier_y = TrigSeries::from_packed(spec.fourier_y).shifted(c).packed();
    return out;
}

}  // namespace iw
