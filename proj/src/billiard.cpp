#include "iwave/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace iw {

double circle_distance(double a, double b) {
    const double d = frac(a - b);
    return std::min(d, 1.0 - d);
}

namespace {

double wrap_signed(double d) {
    d = frac(d);
    return d > 0.5 ? d - 1.0 : d;
}

}  // namespace

Billiard::Billiard(Domain dom, double morse_window) : dom_(std::move(dom)), window_(morse_window) {
    chars_ = check_lambda_simple(dom_);
    if (!chars_.verdict) throw GeometryError("billiard: domain is not lambda-simple: " + chars_.reason);
    for (Sign s : {Sign::Plus, Sign::Minus}) {
        const auto& pts = chars_.of(s);
        const CriticalPoint& a = pts[0].d2 > 0 ? pts[0] : pts[1];
        const CriticalPoint& b = pts[0].d2 > 0 ? pts[1] : pts[0];
        if (!(a.d2 > 0 && b.d2 < 0)) throw GeometryError("billiard: critical points are not a min/max pair");
        Crit& c = crit_[idx(s)];
        c.tmin = a.theta;
        c.tmax = b.theta;
        dom_.level(s).eval_all(c.tmin, 4, c.dmin);
        dom_.level(s).eval_all(c.tmax, 4, c.dmax);
        c.fmin = c.dmin[0];
        c.fmax = c.dmax[0];
    }
    build_lift();
}

std::pair<double, double> Billiard::critical(Sign s) const {
    return {crit_[idx(s)].tmin, crit_[idx(s)].tmax};
}

GammaValue Billiard::morse(const double* d, double tc, double t) const {
    const double u = wrap_signed(t - tc);
    if (u == 0.0) return {frac(tc), -1.0};
    const double a = d[2], b = d[3], c = d[4];
    // divided difference (P(v) - P(u)) / (v - u) of the quartic Taylor model P
    double v = -u - b / (3.0 * a) * u * u;
    for (int it = 0; it < 8; ++it) {
        const double g = 0.5 * a * (v + u) + b / 6.0 * (v * v + v * u + u * u) +
                         c / 24.0 * (v * v * v + v * v * u + v * u * u + u * u * u);
        const double gp = 0.5 * a + b / 6.0 * (2.0 * v + u) + c / 24.0 * (3.0 * v * v + 2.0 * v * u + u * u);
        const double dv = g / gp;
        v -= dv;
        if (std::abs(dv) < 1e-18) break;
    }
    auto dp = [&](double x) { return a * x + 0.5 * b * x * x + c / 6.0 * x * x * x; };
    return {frac(tc + v), dp(u) / dp(v)};
}

GammaValue Billiard::gamma(Sign s, double theta) const {
    const Crit& c = crit_[idx(s)];
    const double t = frac(theta);
    if (circle_distance(t, c.tmin) < window_) return morse(c.dmin, c.tmin, t);
    if (circle_distance(t, c.tmax) < window_) return morse(c.dmax, c.tmax, t);
    const TrigSeries& f = dom_.level(s);
    double ft[2];
    f.eval_all(t, 1, ft);
    const double target = std::clamp(ft[0], c.fmin, c.fmax);
    const double span = frac(c.tmax - c.tmin);
    const double u = frac(t - c.tmin);
    double lo, hi;
    bool increasing;
    if (u < span) {
        lo = span; hi = 1.0; increasing = false;
    } else {
        lo = 0.0; hi = span; increasing = true;
    }
    // initial guess from the linear interpolation of the monotone arc
    double v = increasing ? lo + (target - c.fmin) / (c.fmax - c.fmin) * (hi - lo)
                          : lo + (c.fmax - target) / (c.fmax - c.fmin) * (hi - lo);
    v = std::clamp(v, lo, hi);
    double fv[2] = {0.0, 0.0};
    for (int it = 0; it < 200; ++it) {
        f.eval_all(c.tmin + v, 1, fv);
        const double g = fv[0] - target;
        if (g == 0.0) break;
        if ((g < 0.0) == increasing) lo = v; else hi = v;
        double vn = v - g / fv[1];
        if (!(vn > lo && vn < hi) || !std::isfinite(vn)) vn = 0.5 * (lo + hi);
        const double step = std::abs(vn - v);
        v = vn;
        if (step < 1e-16 || hi - lo < 1e-16) {
            f.eval_all(c.tmin + v, 1, fv);
            break;
        }
        if (it == 199) throw GeometryError("gamma: root bracketing failed");
    }
    return {frac(c.tmin + v), ft[1] / fv[1]};
}

GammaValue Billiard::map(double theta, int k) const {
    GammaValue out{frac(theta), 1.0};
    const Sign first = k >= 0 ? Sign::Minus : Sign::Plus;
    const Sign second = other(first);
    for (int i = 0; i < std::abs(k); ++i) {
        const GammaValue g1 = gamma(first, out.theta);
        const GammaValue g2 = gamma(second, g1.theta);
        out.theta = g2.theta;
        out.deriv *= g1.deriv * g2.deriv;
    }
    return out;
}

int Billiard::mu(Sign s, double theta) const {
    const double d = dom_.level(s).eval(theta, 1);
    return (d > 0) - (d < 0);
}

void Billiard::build_lift() {
    const int n = 4096;
    lift_.assign(n + 1, 0.0);
    for (int j = 0; j <= n; ++j) {
        const double t = static_cast<double>(j) / n;
        const double d = frac(map(t, 1).theta - t);
        lift_[j] = j == 0 ? d : d + std::round(lift_[j - 1] - d);
    }
    if (std::abs(lift_[n] - lift_[0]) > 1e-6) throw GeometryError("billiard: lift of b is not degree one");
}

double Billiard::lift_displacement(double theta) const {
    const int n = static_cast<int>(lift_.size()) - 1;
    const double t = frac(theta);
    const double x = t * n;
    const int j = std::min(static_cast<int>(x), n - 1);
    const double ref = lift_[j] + (x - j) * (lift_[j + 1] - lift_[j]);
    const double d = frac(map(t, 1).theta - t);
    return d + std::round(ref - d);
}

namespace {

// Lift of b^q minus identity minus p, with (b^q)'.
struct Fq {
    double value;
    double deriv;
};

Fq lift_power(const Billiard& bil, double t, int q, int p) {
    double acc = 0.0, der = 1.0, x = t;
    for (int i = 0; i < q; ++i) {
        acc += bil.lift_displacement(x);
        const GammaValue g = bil.map(x, 1);
        der *= g.deriv;
        x = g.theta;
    }
    return {acc - p, der};
}

}  // namespace

BilliardAnalysis analyze_dynamics(const Billiard& bil, int grid_n, int max_iter, double log_margin) {
    BilliardAnalysis an;
    // rotation number from the averaged lift after a transient
    double t = 0.123456789;
    const int transient = max_iter / 2, m = std::max(1, max_iter - transient);
    for (int i = 0; i < transient; ++i) t = bil.map(t, 1).theta;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        acc += bil.lift_displacement(t);
        t = bil.map(t, 1).theta;
    }
    an.rotation_number = acc / m;

    // continued-fraction convergents
    {
        const double rho = an.rotation_number;
        double x = rho;
        long long h0 = 1, h1 = static_cast<long long>(std::floor(x));
        long long k0 = 0, k1 = 1;
        double r = x - std::floor(x);
        for (int it = 0; it < 40; ++it) {
            if (std::abs(rho - static_cast<double>(h1) / k1) < 1.0 / (2.0 * k1 * grid_n)) {
                an.rational = true;
                an.p = static_cast<int>(h1);
                an.q = static_cast<int>(k1);
                break;
            }
            if (r < 1e-15 || k1 > 100000) break;
            x = 1.0 / r;
            const long long a = static_cast<long long>(std::floor(x));
            r = x - a;
            const long long h2 = a * h1 + h0, k2 = a * k1 + k0;
            h0 = h1; h1 = h2; k0 = k1; k1 = k2;
        }
    }
    if (!an.rational) {
        an.ms_verdict = false;
        an.reason = "no periodic orbit detected";
        return an;
    }

    const int q = an.q, p = an.p;
    std::vector<double> F(grid_n);
    double maxF = 0.0;
    for (int j = 0; j < grid_n; ++j) {
        F[j] = lift_power(bil, static_cast<double>(j) / grid_n, q, p).value;
        maxF = std::max(maxF, std::abs(F[j]));
    }
    an.period = q;
    std::ostringstream why;
    if (maxF < 1e-9) {
        // b^q is the identity: every point is periodic with multiplier 1
        for (int j = 0; j < 8; ++j) {
            const double tt = static_cast<double>(j) / 8;
            an.neutral.push_back({tt, lift_power(bil, tt, q, p).deriv});
        }
        an.ms_verdict = false;
        an.margin = 0.0;
        an.reason = "(b^n)' = 1 at periodic points (b^n is the identity)";
    } else {
        std::vector<double> roots;
        for (int j = 0; j < grid_n; ++j) {
            const int jn = (j + 1) % grid_n;
            double a = F[j], b = F[jn];
            if (a == 0.0) { roots.push_back(static_cast<double>(j) / grid_n); continue; }
            if ((a > 0) == (b > 0)) {
                const int jp = (j + grid_n - 1) % grid_n;
                if (std::abs(a) < 1e-9 && std::abs(a) <= std::abs(F[jp]) && std::abs(a) <= std::abs(b))
                    an.neutral.push_back({static_cast<double>(j) / grid_n, lift_power(bil, static_cast<double>(j) / grid_n, q, p).deriv});
                continue;
            }
            double lo = static_cast<double>(j) / grid_n, hi = lo + 1.0 / grid_n;
            double flo = a;
            double x = lo - a * (hi - lo) / (b - a);
            for (int it = 0; it < 100; ++it) {
                const Fq fx = lift_power(bil, x, q, p);
                if (fx.value == 0.0) break;
                if ((fx.value > 0) == (flo > 0)) { lo = x; flo = fx.value; } else { hi = x; }
                double xn = x - fx.value / (fx.deriv - 1.0);
                if (!(xn > lo && xn < hi) || !std::isfinite(xn)) xn = 0.5 * (lo + hi);
                const double step = std::abs(xn - x);
                x = xn;
                if (step < 1e-15 || hi - lo < 1e-15) break;
            }
            roots.push_back(frac(x));
        }
        double margin = 1e300;
        for (double r : roots) {
            const GammaValue g = bil.map(r, q);
            const double lm = std::log(g.deriv);
            margin = std::min(margin, std::abs(lm));
            // minimal period check
            for (int d = 1; d < q; ++d)
                if (q % d == 0 && circle_distance(bil.map(r, d).theta, r) < 1e-9)
                    why << "periodic point " << r << " has period " << d << " < " << q << "; ";
            PeriodicPoint pp{r, g.deriv};
            if (std::abs(lm) < log_margin) an.neutral.push_back(pp);
            else if (lm > 0) an.sigma_plus.push_back(pp);
            else an.sigma_minus.push_back(pp);
        }
        an.margin = roots.empty() ? 0.0 : margin;
        if (roots.empty()) why << "no periodic orbit detected; ";
        if (!an.neutral.empty()) why << "(b^n)' = 1 within margin at some periodic point; ";
        an.ms_verdict = !roots.empty() && an.neutral.empty() && why.str().empty();
        an.reason = why.str();
    }

    // sign relations mu^+-(gamma^+-(t)) = -mu^+-(t) and sign l^-+(z(gamma^+-(t)) - z(t)) = +-mu^+-(t)
    const Domain& dom = bil.domain();
    const double lam = dom.lambda();
    for (int i = 0; i < 1000; ++i) {
        const double tt = frac((i + 0.5) / 1000.0 + 0.000123);
        for (Sign s : {Sign::Plus, Sign::Minus}) {
            const int m0 = bil.mu(s, tt);
            if (m0 == 0) continue;
            const GammaValue g = bil.gamma(s, tt);
            if (circle_distance(g.theta, tt) < 1e-12) continue;
            ++an.sign_samples;
            const double lv = linear_form(lam, other(s), Vec2(dom.z(g.theta) - dom.z(tt)));
            const int lhs = (lv > 0) - (lv < 0);
            const int m1 = bil.mu(s, g.theta);
            if ((lhs != 0 && lhs != sgn(s) * m0) || (m1 != 0 && m1 != -m0)) ++an.sign_violations;
        }
    }
    return an;
}

Trajectory trajectory(const Billiard& bil, double theta0, int steps) {
    Trajectory tr;
    const Domain& dom = bil.domain();
    const double lam = dom.lambda();
    double t = frac(theta0);
    tr.theta.push_back(t);
    tr.points.push_back(dom.z(t));
    for (int k = 0; k < steps; ++k) {
        const Sign s = (k % 2 == 0) ? Sign::Minus : Sign::Plus;
        t = bil.gamma(s, t).theta;
        tr.theta.push_back(t);
        tr.points.push_back(dom.z(t));
        const Vec2 chord = tr.points[k + 1] - tr.points[k];
        const Vec2 dir = lvec(lam, other(s)).normalized();
        const double len = chord.norm();
        if (len > 1e-9) {
            const double cross = std::abs(chord.x() * dir.y() - chord.y() * dir.x()) / len;
            tr.max_direction_error = std::max(tr.max_direction_error, cross);
        }
    }
    return tr;
}

int escape_iterations(const Billiard& bil, const BilliardAnalysis& an, double r, int samples, int max_iter,
                      bool backward) {
    const auto& target = backward ? an.sigma_plus : an.sigma_minus;
    const auto& source = backward ? an.sigma_minus : an.sigma_plus;
    auto near = [&](const std::vector<PeriodicPoint>& set, double x) {
        for (const auto& p : set)
            if (circle_distance(p.theta, x) < r) return true;
        return false;
    };
    int worst = 0;
    for (int i = 0; i < samples; ++i) {
        double x = (i + 0.5) / samples;
        if (near(source, x)) continue;
        int it = 0;
        while (!near(target, x)) {
            if (++it > max_iter) return -1;
            x = bil.map(x, backward ? -1 : 1).theta;
        }
        worst = std::max(worst, it);
    }
    return worst;
}

}  // namespace iw
