#include "iwave/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "iwave/kernels.hpp"

namespace iw {

namespace {

const cplx I(0.0, 1.0);

cplx dot(const CVec2& a, const CVec2& b) { return a(0) * b(0) + a(1) * b(1); }

cplx p_of(cplx omega, const CVec2& xi) {
    return omega * omega * xi(0) * xi(0) - (1.0 - omega * omega) * xi(1) * xi(1);
}

std::vector<cplx> poly_mul(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    std::vector<cplx> c(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

}  // namespace

FlatSymbols flat_symbols(cplx omega, double nu, const CVec2& xi) {
    FlatSymbols s;
    const cplx r2 = dot(xi, xi);
    s.p = p_of(omega, xi);
    s.q = r2 * r2;
    s.A = s.p + I * omega * nu * s.q;
    s.A6 = s.p + 2.0 * I * omega * nu * s.q - nu * nu * s.q * r2;
    return s;
}

cplx p_factored(cplx omega, const CVec2& xi) {
    const CVec2 Lp = lvec(omega, Sign::Plus), Lm = lvec(omega, Sign::Minus);
    if (!((1.0 - omega * omega).real() > 0.0)) throw DomainError("p_factored: branch requires Re(1 - omega^2) > 0");
    return -4.0 * dot(xi, Lp) * dot(xi, Lm);
}

CVec2 pushforward_covector(const CMat2& J, const CVec2& xi) {
    const cplx det = J.determinant();
    if (std::abs(det) < 1e-300 || !std::isfinite(std::abs(det)))
        throw DeformationError("deformed_symbol: singular Jacobian");
    // J^{-T} xi via the adjugate
    CMat2 adjT;
    adjT << J(1, 1), -J(1, 0), -J(0, 1), J(0, 0);
    return adjT * xi / det;
}

cplx deformed_symbol(const CMat2& J, SymbolKind kind, cplx omega, double nu, const Vec2& xi) {
    const FlatSymbols s = flat_symbols(omega, nu, pushforward_covector(J, xi.cast<cplx>()));
    switch (kind) {
        case SymbolKind::P: return s.p;
        case SymbolKind::Q: return s.q;
        case SymbolKind::A: return s.A;
        case SymbolKind::A6: return s.A6;
    }
    return s.p;
}

cplx deformed_p_cramer(const CMat2& J, double lambda, const Vec2& xi) {
    const Vec2 Lp = lvec(lambda, Sign::Plus), Lm = lvec(lambda, Sign::Minus);
    const CVec2 JLp = J * Lp.cast<cplx>(), JLm = J * Lm.cast<cplx>();
    auto ell = [&](Sign s, const CVec2& v) { return linear_form(cplx(lambda), s, v); };
    const cplx mpp = ell(Sign::Plus, JLp), mpm = ell(Sign::Plus, JLm);
    const cplx mmp = ell(Sign::Minus, JLp), mmm = ell(Sign::Minus, JLm);
    const double X = xi.dot(Lp), Y = xi.dot(Lm);
    const cplx det = mpp * mmm - mpm * mmp;
    const cplx rhs = -(mmm * mpp + mmp * mpm) * X * Y + mmm * mpm * X * X + mpp * mmp * Y * Y;
    return 4.0 * rhs / (det * det);
}

double inviscid_slack(const CMat2& J, cplx omega, const Vec2& xi, double tau, double C0) {
    const cplx p = deformed_symbol(J, SymbolKind::P, omega, 0.0, xi);
    return p.imag() + C0 * tau * std::abs(p.real()) - (tau + omega.imag()) * xi.squaredNorm() / C0;
}

double singular_ratio(const CMat2& J, double lambda, double nu, const Vec2& xi) {
    const cplx A = deformed_symbol(J, SymbolKind::A, cplx(lambda), nu, xi);
    const double r2 = xi.squaredNorm();
    return std::abs(A) / (r2 * (1.0 + nu * r2));
}

EllipticityCertificate certify_ellipticity(const DeformationMap& dm, const EllipticityOptions& opt) {
    EllipticityCertificate cert;
    cert.tau = dm.tau();
    std::vector<Vec2> pts = interior_grid(dm.domain(), opt.grid_n);
    for (int j = 0; j < opt.boundary_n; ++j) pts.push_back(dm.domain().z(static_cast<double>(j) / opt.boundary_n));
    const auto vals = parallel_deformation_grid(dm, pts);
    std::vector<CMat2> Js(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) Js[i] = vals[i].J;

    std::vector<Vec2> dirs(opt.directions);
    // half circle suffices: both symbols are even in xi
    for (int k = 0; k < opt.directions; ++k) {
        const double a = kPi * (k + 0.5) / opt.directions;
        dirs[k] = Vec2(std::cos(a), std::sin(a));
    }
    std::vector<cplx> omegas;
    for (int a = 0; a < opt.re_n; ++a)
        for (int b = 0; b < opt.im_n; ++b) {
            const double re = opt.re_n == 1 ? opt.lambda
                                            : opt.lambda - opt.re_half + 2.0 * opt.re_half * a / (opt.re_n - 1);
            const double im = opt.im_n == 1 ? opt.im_lo : opt.im_lo + (opt.im_hi - opt.im_lo) * b / (opt.im_n - 1);
            omegas.emplace_back(re, im);
        }
    cert.points = static_cast<int>(pts.size());
    cert.directions = opt.directions;
    cert.omegas = static_cast<int>(omegas.size());

    const auto samples = parallel_inviscid_samples(Js, omegas, dirs, dm.tau());
    // leading coefficient in Im omega: p(i y) ~ y^2 (p(i) - p(0))
    std::vector<cplx> lead;
    lead.reserve(Js.size() * dirs.size());
    for (const CMat2& J : Js)
        for (const Vec2& d : dirs)
            lead.push_back(deformed_symbol(J, SymbolKind::P, cplx(0.0, 1.0), 0.0, d) -
                           deformed_symbol(J, SymbolKind::P, cplx(0.0), 0.0, d));
    auto worst_asym = [&](double C) {
        double m = std::numeric_limits<double>::infinity();
        for (const cplx& c : lead) m = std::min(m, c.imag() + C * dm.tau() * std::abs(c.real()));
        return m;
    };
    auto worst = [&](double C, size_t* at) {
        double m = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < samples.size(); ++i) {
            const auto& s = samples[i];
            const double v = s.im + C * dm.tau() * s.abs_re - s.rhs / C;
            if (v < m) {
                m = v;
                if (at) *at = i;
            }
        }
        return m;
    };
    auto feasible = [&](double C) { return worst(C, nullptr) >= 0.0 && worst_asym(C) >= 0.0; };
    size_t at = 0;
    if (!feasible(opt.c0_max)) {
        cert.C0 = std::numeric_limits<double>::infinity();
        cert.inviscid_slack = worst(opt.c0_max, &at);
        cert.asymptotic_slack = worst_asym(opt.c0_max);
        cert.inviscid_pass = false;
    } else {
        double lo = 0.0, hi = std::log(opt.c0_max);  // log C0
        if (feasible(1.0)) hi = 0.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (feasible(std::exp(mid))) hi = mid; else lo = mid;
        }
        cert.C0 = std::exp(hi);
        cert.inviscid_slack = worst(cert.C0, &at);
        cert.asymptotic_slack = worst_asym(cert.C0);
        cert.inviscid_pass = true;
    }
    const size_t per_point = dirs.size() * omegas.size();
    const size_t pi = at / per_point, rest = at % per_point;
    cert.worst_x = pts[pi];
    cert.worst_omega = omegas[rest / dirs.size()];
    cert.worst_xi = dirs[rest % dirs.size()];

    // singular ellipticity at omega = lambda, t = nu |xi|^2
    std::vector<double> ts{0.0};
    for (int k = 0; k <= 48; ++k) ts.push_back(std::pow(10.0, -4.0 + 0.25 * k));
    cert.t_samples = static_cast<int>(ts.size()) + 1;
    const auto sing = parallel_singular_samples(Js, opt.lambda, dirs, ts);
    cert.singular_cinv = sing.first;
    cert.singular_worst_t = sing.second;
    cert.singular_pass = cert.singular_cinv >= 1.0 / opt.c0_max;
    return cert;
}

std::vector<cplx> polynomial_roots(const std::vector<cplx>& coef) {
    int d = static_cast<int>(coef.size()) - 1;
    while (d > 0 && coef[d] == 0.0) --d;
    if (d <= 0) return {};
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 1; i < d; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) C(i, d - 1) = -coef[i] / coef[d];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
    std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + d);
    std::sort(r.begin(), r.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
    return r;
}

RootCount count_roots(const std::vector<cplx>& coef, double real_tol) {
    RootCount rc;
    rc.roots = polynomial_roots(coef);
    rc.min_abs_im = std::numeric_limits<double>::infinity();
    for (const cplx& z : rc.roots) {
        rc.min_abs_im = std::min(rc.min_abs_im, std::abs(z.imag()));
        if (std::abs(z.imag()) < real_tol) rc.indeterminate = true;
        else if (z.imag() > 0.0) ++rc.upper;
        else ++rc.lower;
    }
    return rc;
}

bool CoercivityReport::pass() const {
    for (int k = 0; k < 4; ++k)
        if (counts[k].indeterminate || counts[k].upper != expected[k][0] || counts[k].lower != expected[k][1])
            return false;
    return true;
}

CoercivityReport coercivity_roots(const CMat2& J, double lambda, const Vec2& xi_t, const Vec2& n, double nu) {
    const CVec2 a = pushforward_covector(J, xi_t.cast<cplx>());
    const CVec2 b = pushforward_covector(J, n.cast<cplx>());
    const double l2 = lambda * lambda, m2 = 1.0 - l2;
    // eta = a + z b
    const std::vector<cplx> s{dot(a, a), 2.0 * dot(a, b), dot(b, b)};
    const std::vector<cplx> q = poly_mul(s, s);
    const std::vector<cplx> p{l2 * a(0) * a(0) - m2 * a(1) * a(1), 2.0 * (l2 * a(0) * b(0) - m2 * a(1) * b(1)),
                              l2 * b(0) * b(0) - m2 * b(1) * b(1)};
    std::vector<cplx> A(5, 0.0);
    for (int k = 0; k < 5; ++k) A[k] = I * lambda * nu * q[k] + (k < 3 ? p[k] : cplx(0.0));
    const cplx qb = dot(b, b) * dot(b, b);
    const std::vector<cplx> bl{p[2], 0.0, I * lambda * qb};
    CoercivityReport rep;
    rep.counts = {count_roots(q), count_roots(p), count_roots(A), count_roots(bl)};
    return rep;
}

CoercivityReport coercivity_roots(const DeformationMap& dm, double theta, const Vec2& xi_t, double nu) {
    const Vec2 d = dm.domain().z(theta, 1);
    const Vec2 n = Vec2(d(1), -d(0)).normalized();  // outward for the counterclockwise boundary
    const XiValue v = dm.eval(dm.domain().z(theta));
    CoercivityReport rep = coercivity_roots(v.J, dm.lambda(), xi_t, n, nu);
    rep.theta = theta;
    return rep;
}

double param_weight(double r, double s, double nu, const Vec2& xi) {
    const double k2 = xi.squaredNorm();
    return std::pow(1.0 + k2, r) * std::pow(1.0 + nu * k2, s);
}

double param_norm(double r, double s, double nu, const std::vector<Vec2>& xi, const std::vector<double>& mag,
                  double cell_area) {
    double acc = 0.0;
    for (size_t k = 0; k < xi.size(); ++k) acc += param_weight(r, s, nu, xi[k]) * mag[k] * mag[k];
    return std::sqrt(acc * cell_area);
}

}  // namespace iw
