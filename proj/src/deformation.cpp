#include "iwave/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iwave/kernels.hpp"
#include "iwave/parallel.hpp"
#include "iwave/quadrature.hpp"

namespace iw {

namespace {

constexpr int kGaussNodes = 32;

double wrap_signed(double d) {
    d = frac(d);
    return d > 0.5 ? d - 1.0 : d;
}

}  // namespace

DeformationMap::DeformationMap(const Billiard& bil, TrigSeries h, double tau, double seam)
    : dom_(bil.domain()), h_(std::move(h)), tau_(tau), lam_(bil.lambda()),
      mu_(std::sqrt(1.0 - bil.lambda() * bil.lambda())), seam_(seam) {
    for (Sign s : {Sign::Plus, Sign::Minus}) {
        const auto [tmin, tmax] = bil.critical(s);
        for (int k = 0; k < 2; ++k) {
            const double t = k == 0 ? tmin : tmax;
            double d[3];
            dom_.level(s).eval_all(t, 2, d);
            tang_[idx(s)][k] = Tangency{t, d[0], 0.5 * d[2]};
        }
    }
}

DeformationMap DeformationMap::with_tau(double tau) const {
    DeformationMap out = *this;
    out.tau_ = tau;
    return out;
}

CVec2 DeformationMap::boundary(double theta) const {
    return dom_.z(cplx(theta, tau_ * h_.eval(theta)));
}

CVec2 DeformationMap::boundary_dtheta(double theta) const {
    double hv[2];
    h_.eval_all(theta, 1, hv);
    return dom_.z(cplx(theta, tau_ * hv[0]), 1) * cplx(1.0, tau_ * hv[1]);
}

double DeformationMap::f(Sign s, double theta, int order) const { return dom_.level(s).eval(theta, order); }

cplx DeformationMap::F(Sign s, double theta) const {
    const CVec2 z = boundary(theta);
    return static_cast<double>(sgn(s)) * z(0) / lam_ + z(1) / mu_;
}

cplx DeformationMap::dF(Sign s, double theta) const {
    const CVec2 z = boundary_dtheta(theta);
    return static_cast<double>(sgn(s)) * z(0) / lam_ + z(1) / mu_;
}

double DeformationMap::tangency_distance(Sign s, double c) const {
    const auto& t = tang_[idx(s)];
    return std::min((c - t[0].value) / std::abs(t[0].alpha), (t[1].value - c) / std::abs(t[1].alpha));
}

std::array<double, 2> DeformationMap::level_roots(Sign s, double c) const {
    const auto& t = tang_[idx(s)];
    const double fmin = t[0].value, fmax = t[1].value;
    if (c <= fmin) return {t[0].theta, t[0].theta};
    if (c >= fmax) return {t[1].theta, t[1].theta};
    const TrigSeries& f = dom_.level(s);
    std::array<double, 2> out{};
    for (int arc = 0; arc < 2; ++arc) {
        // increasing arc tmin -> tmax, decreasing arc tmax -> tmin + 1
        const double start = arc == 0 ? t[0].theta : t[1].theta;
        const double len = arc == 0 ? frac(t[1].theta - t[0].theta) : 1.0 - frac(t[1].theta - t[0].theta);
        const bool increasing = arc == 0;
        double lo = 0.0, hi = len;
        double v = increasing ? (c - fmin) / (fmax - fmin) * len : (fmax - c) / (fmax - fmin) * len;
        double fv[2];
        for (int it = 0; it < 200; ++it) {
            f.eval_all(start + v, 1, fv);
            const double g = fv[0] - c;
            if (g == 0.0) break;
            if ((g < 0.0) == increasing) lo = v; else hi = v;
            double vn = v - g / fv[1];
            if (!(vn > lo && vn < hi) || !std::isfinite(vn)) vn = 0.5 * (lo + hi);
            const double step = std::abs(vn - v);
            v = vn;
            if (step < 1e-17 || hi - lo < 1e-16) break;
        }
        out[arc] = frac(start + v);
    }
    return out;
}

UpDownPair DeformationMap::updown(Sign s, const Vec2& x) const {
    const double c = linear_form(lam_, s, x);
    const auto& t = tang_[idx(s)];
    const double span = t[1].value - t[0].value;
    if (c < t[0].value - 1e-12 * span || c > t[1].value + 1e-12 * span)
        throw DomainError("updown: point outside the closed domain");
    const auto r = level_roots(s, c);
    const Sign o = other(s);
    UpDownPair p{s, r[0], r[1]};
    if (f(o, p.theta_down) > f(o, p.theta_up)) std::swap(p.theta_down, p.theta_up);
    const double ov = linear_form(lam_, o, x);
    const auto& to = tang_[idx(o)];
    const double tol = 1e-10 * (to[1].value - to[0].value);
    if (ov < f(o, p.theta_down) - tol || ov > f(o, p.theta_up) + tol)
        throw DomainError("updown: point outside the closed domain");
    return p;
}

bool DeformationMap::inside(const Vec2& x, double tol) const {
    const double c = linear_form(lam_, Sign::Plus, x);
    const auto& t = tang_[0];
    if (c <= t[0].value || c >= t[1].value) return false;
    const auto r = level_roots(Sign::Plus, c);
    const double a = f(Sign::Minus, r[0]), b = f(Sign::Minus, r[1]);
    const double o = linear_form(lam_, Sign::Minus, x);
    return o > std::min(a, b) + tol && o < std::max(a, b) - tol;
}

DeformationMap::GPart DeformationMap::g_part(Sign s, double c, double o, bool jac) const {
    const Sign os = other(s);
    const auto& t = tang_[idx(s)];
    const double cc = std::clamp(c, t[0].value, t[1].value);
    auto r = level_roots(s, cc);
    double td = r[0], tu = r[1];
    double fod = f(os, td), fou = f(os, tu);
    if (fod > fou) {
        std::swap(td, tu);
        std::swap(fod, fou);
    }
    GPart out{};
    const cplx Fd = F(s, td);
    if (tangency_distance(s, cc) >= seam_) {
        const cplx Fu = F(s, tu);
        const double den = fou - fod;
        const cplx Q = (Fu - Fd) / den;
        out.g = Fd + (o - fod) * Q;
        out.ds = Q;
        out.morse = false;
        if (jac) {
            const double td1 = 1.0 / f(s, td, 1), tu1 = 1.0 / f(s, tu, 1);
            const cplx dFd = dF(s, td) * td1, dFu = dF(s, tu) * tu1;
            const double dfod = f(os, td, 1) * td1, dfou = f(os, tu, 1) * tu1;
            const cplx dQ = ((dFu - dFd) - Q * (dfou - dfod)) / den;
            out.dc = dFd - dfod * Q + (o - fod) * dQ;
        }
        return out;
    }
    // mean values of F' and f_o' over the parameter segment [td, tu]; the segment length cancels
    const double delta = wrap_signed(tu - td);
    cplx num = 0.0;
    double den = 0.0;
    if (delta == 0.0) {
        num = dF(s, td);
        den = f(os, td, 1);
    } else {
        const QuadRule& q = gauss_legendre01(kGaussNodes);
        for (int k = 0; k < kGaussNodes; ++k) {
            const double th = td + q.x[k] * delta;
            num += q.w[k] * dF(s, th);
            den += q.w[k] * f(os, th, 1);
        }
    }
    const cplx Q = num / den;
    out.g = Fd + (o - fod) * Q;
    out.ds = Q;
    out.morse = true;
    if (jac) {
        const double hc = 1e-6 * (t[1].value - t[0].value);
        auto gv = [&](double cv) { return g_part(s, cv, o, false).g; };
        if (cc - hc >= t[0].value && cc + hc <= t[1].value)
            out.dc = (gv(cc + hc) - gv(cc - hc)) / (2.0 * hc);
        else if (cc + 2.0 * hc <= t[1].value)
            out.dc = (-3.0 * out.g + 4.0 * gv(cc + hc) - gv(cc + 2.0 * hc)) / (2.0 * hc);
        else
            out.dc = (3.0 * out.g - 4.0 * gv(cc - hc) + gv(cc - 2.0 * hc)) / (2.0 * hc);
    }
    return out;
}

XiValue DeformationMap::eval(const Vec2& x, bool jacobian) const {
    const double cp = linear_form(lam_, Sign::Plus, x);
    const double cm = linear_form(lam_, Sign::Minus, x);
    const GPart gp = g_part(Sign::Plus, cp, cm, jacobian);
    const GPart gm = g_part(Sign::Minus, cm, cp, jacobian);
    const Vec2 Lp = lvec(lam_, Sign::Plus), Lm = lvec(lam_, Sign::Minus);
    XiValue out;
    out.g = {gp.g, gm.g};
    out.morse = {gp.morse, gm.morse};
    out.xi = gp.g * Lp.cast<cplx>() + gm.g * Lm.cast<cplx>();
    if (jacobian) {
        const Vec2 dlp(1.0 / lam_, 1.0 / mu_), dlm(-1.0 / lam_, 1.0 / mu_);
        const CVec2 grad_p = gp.dc * dlp.cast<cplx>() + gp.ds * dlm.cast<cplx>();
        const CVec2 grad_m = gm.dc * dlm.cast<cplx>() + gm.ds * dlp.cast<cplx>();
        out.J = Lp.cast<cplx>() * grad_p.transpose() + Lm.cast<cplx>() * grad_m.transpose();
    } else {
        out.J.setZero();
    }
    return out;
}

cplx DeformationMap::slope(Sign s, const Vec2& x) const {
    const double c = linear_form(lam_, s, x);
    const double o = linear_form(lam_, other(s), x);
    return g_part(s, c, o, false).ds;
}

cplx DeformationMap::transversality_formula(Sign s, const Vec2& x) const {
    const UpDownPair p = updown(s, x);
    const double num = h_.eval(p.theta_up) * f(s, p.theta_up, 1) - h_.eval(p.theta_down) * f(s, p.theta_down, 1);
    const Sign o = other(s);
    return cplx(0.0, num / (f(o, p.theta_up) - f(o, p.theta_down)));
}

std::vector<Vec2> interior_grid(const Domain& dom, int n, double margin) {
    constexpr int kPoly = 2048;
    std::vector<Vec2> poly(kPoly);
    Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
    for (int j = 0; j < kPoly; ++j) {
        poly[j] = dom.z(static_cast<double>(j) / kPoly);
        lo = lo.cwiseMin(poly[j]);
        hi = hi.cwiseMax(poly[j]);
    }
    const double diam = (hi - lo).norm();
    std::vector<Vec2> out;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Vec2 x(lo(0) + (i + 0.5) / n * (hi(0) - lo(0)), lo(1) + (j + 0.5) / n * (hi(1) - lo(1)));
            bool in = false;
            double dmin = 1e300;
            for (int k = 0; k < kPoly; ++k) {
                const Vec2& a = poly[k];
                const Vec2& b = poly[(k + 1) % kPoly];
                if ((a(1) > x(1)) != (b(1) > x(1)) &&
                    x(0) < a(0) + (x(1) - a(1)) / (b(1) - a(1)) * (b(0) - a(0)))
                    in = !in;
                const Vec2 ab = b - a;
                const double u = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
                dmin = std::min(dmin, (a + u * ab - x).norm());
            }
            if (in && dmin > margin * diam) out.push_back(x);
        }
    return out;
}

Eigen::Matrix4d realification(const CMat2& J) {
    Eigen::Matrix4d M;
    const cplx I(0.0, 1.0);
    const CVec2 cols[4] = {J.col(0), J.col(1), I * J.col(0), I * J.col(1)};
    for (int k = 0; k < 4; ++k) {
        M(0, k) = cols[k](0).real();
        M(1, k) = cols[k](0).imag();
        M(2, k) = cols[k](1).real();
        M(3, k) = cols[k](1).imag();
    }
    return M;
}

DeformationCertificate verify_deformation(const DeformationMap& dm, int grid_n, double re_ratio_tol) {
    DeformationCertificate cert;
    cert.tau = dm.tau();
    cert.grid_n = grid_n;
    cert.re_ratio_tol = re_ratio_tol;
    const std::vector<Vec2> pts = interior_grid(dm.domain(), grid_n);
    const int n = static_cast<int>(pts.size());
    cert.samples = n;
    if (n < 2) return cert;

    // (a) derivative at tau = 0 by a one-sided difference (Xi(0) has zero slope)
    cert.fd_step = dm.tau() > 0.0 ? std::min(dm.tau(), 1e-6) : 1e-6;
    const DeformationMap small = dm.with_tau(cert.fd_step);
    bool positive = true;
    std::array<int, 2> signs{};
    for (Sign s : {Sign::Plus, Sign::Minus}) {
        const auto T = parallel_map_index<cplx>(n, [&](int i) { return small.slope(s, pts[i]) / cert.fd_step; });
        double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
        int npos = 0;
        for (const cplx& v : T) {
            mn = std::min(mn, v.imag());
            mx = std::max(mx, std::abs(v.real()) / std::abs(v.imag()));
            npos += v.imag() > 0.0;
        }
        cert.min_im[idx(s)] = mn;
        cert.max_re_ratio[idx(s)] = mx;
        signs[idx(s)] = npos == n ? 1 : (npos == 0 ? -1 : 0);
        positive = positive && mn > 0.0 && mx < re_ratio_tol;
        if (dm.tau() > 0.0) {
            const auto Ts = parallel_map_index<cplx>(n, [&](int i) { return dm.slope(s, pts[i]) / dm.tau(); });
            double r = 0.0;
            for (const cplx& v : Ts) r = std::max(r, std::abs(v.real()) / std::abs(v.imag()));
            cert.surrogate_re_ratio[idx(s)] = r;
        }
    }
    cert.same_sign = signs[0] != 0 && signs[0] == signs[1];
    cert.transversal = positive && cert.same_sign;

    // (b), (c) at tau
    const auto vals = parallel_deformation_grid(dm, pts);
    double min_det = std::numeric_limits<double>::infinity(), max_cond = 0.0;
    for (const XiValue& v : vals) {
        min_det = std::min(min_det, std::abs(v.J.determinant()));
        Eigen::JacobiSVD<Eigen::Matrix4d> svd(realification(v.J));
        const auto& sv = svd.singularValues();
        max_cond = std::max(max_cond, sv(0) / sv(3));
    }
    cert.min_abs_det = min_det;
    cert.max_condition = max_cond;
    cert.totally_real = std::isfinite(max_cond) && min_det > 1e-12;

    bool inj = true;
    for (int s = 0; s < 2; ++s) {
        std::vector<cplx> g(n);
        for (int i = 0; i < n; ++i) g[i] = vals[i].g[s];
        cert.injectivity[s] = parallel_min_pair_ratio(pts, g);
        inj = inj && cert.injectivity[s] > 1e-8;
    }
    cert.injective = inj;
    return cert;
}

double max_admissible_tau(const DeformationMap& dm, double tau_hi, int grid_n, int steps) {
    auto ok = [&](double t) {
        try {
            return verify_deformation(dm.with_tau(t), grid_n).pass();
        } catch (const DomainError&) {
            return false;
        }
    };
    if (ok(tau_hi)) return tau_hi;
    double lo = 0.0, hi = tau_hi;
    for (int k = 0; k < steps; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid)) lo = mid; else hi = mid;
    }
    return lo;
}

}  // namespace iw
