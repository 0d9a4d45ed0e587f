#include "iwave/escape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "iwave/parallel.hpp"

namespace iw {

CircleFn pullback(CircleMapFn g, CircleFn Y) {
    return [g = std::move(g), Y = std::move(Y)](double t) {
        const GammaValue v = g(t);
        return Y(v.theta) / v.deriv;
    };
}

CircleMapFn map_gamma(const Billiard& bil, Sign s) {
    return [&bil, s](double t) { return bil.gamma(s, t); };
}

CircleMapFn map_power(const Billiard& bil, int k) {
    return [&bil, k](double t) { return bil.map(t, k); };
}

CircleDynamics dynamics_of(const Billiard& bil, const BilliardAnalysis& an) {
    CircleDynamics d;
    d.iterate = [&bil](double t, int k) { return bil.map(t, k); };
    for (const auto& p : an.sigma_plus) d.sigma_plus.push_back(p.theta);
    for (const auto& p : an.sigma_minus) d.sigma_minus.push_back(p.theta);
    d.period = an.period;
    return d;
}

namespace {

double phi(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

// 1 for s <= 0, 0 for s >= 1, C^infinity in between.
double smooth_step(double s) {
    if (s <= 0.0) return 1.0;
    if (s >= 1.0) return 0.0;
    const double a = phi(1.0 - s), b = phi(s);
    return a / (a + b);
}

double nearest(const std::vector<double>& set, double t) {
    double d = std::numeric_limits<double>::infinity();
    for (double s : set) d = std::min(d, circle_distance(s, t));
    return d;
}

}  // namespace

double X0Field::h0(double t) const {
    const double half = 0.5 * r;
    const double dp = nearest(sigma_plus, t);
    if (dp < r) return smooth_step((dp - half) / half);
    const double dm = nearest(sigma_minus, t);
    if (dm < r) return -smooth_step((dm - half) / half);
    return 0.0;
}

X0Field build_X0(const CircleDynamics& dyn, int grid_n) {
    if (dyn.period <= 0 || dyn.sigma_plus.empty() || dyn.sigma_minus.empty())
        throw EscapeError("MS false: no hyperbolic periodic orbits to build X0 around");
    X0Field f;
    f.sigma_plus = dyn.sigma_plus;
    f.sigma_minus = dyn.sigma_minus;
    f.n = dyn.period;
    const int n = f.n;

    std::vector<double> all = f.sigma_plus;
    all.insert(all.end(), f.sigma_minus.begin(), f.sigma_minus.end());
    double sep = 1.0;
    for (size_t i = 0; i < all.size(); ++i)
        for (size_t j = i + 1; j < all.size(); ++j) sep = std::min(sep, circle_distance(all[i], all[j]));
    double r = std::min(0.25 * sep, 0.1);

    constexpr int kSamples = 64;
    bool found = false;
    for (int halve = 0; halve < 30; ++halve) {
        double sup_m = 0.0, sup_p = 0.0;
        bool inv = true;
        for (double c : f.sigma_plus)
            for (int j = 0; j <= kSamples; ++j) {
                const double t = c - r + 2.0 * r * j / kSamples;
                const GammaValue g = dyn.iterate(t, -n);
                sup_m = std::max(sup_m, g.deriv);
                if (circle_distance(g.theta, c) > r) inv = false;
            }
        for (double c : f.sigma_minus)
            for (int j = 0; j <= kSamples; ++j) {
                const double t = c - r + 2.0 * r * j / kSamples;
                const GammaValue g = dyn.iterate(t, n);
                sup_p = std::max(sup_p, g.deriv);
                if (circle_distance(g.theta, c) > r) inv = false;
            }
        f.sup_dbminus = sup_m;
        f.sup_dbplus = sup_p;
        f.invariant = inv;
        f.halvings = halve;
        if (sup_m < 1.0 && sup_p < 1.0 && inv) {
            found = true;
            break;
        }
        r *= 0.5;
    }
    f.r = r;
    if (!found) {
        std::ostringstream os;
        os << "derivative-bound neighbourhoods not found: r=" << r << " sup_U+ (b^-n)'=" << f.sup_dbminus
           << " sup_U- (b^n)'=" << f.sup_dbplus << " invariant=" << f.invariant;
        throw EscapeError(os.str());
    }

    // Escape times in multiples of n; V+- are invariant under b^-+n, so the first entry suffices.
    const double half = 0.5 * r;
    const int cap = 64;
    auto entry = [&](double t, bool backward) {
        const auto& target = backward ? f.sigma_plus : f.sigma_minus;
        double x = t;
        for (int m = 1; m <= cap; ++m) {
            x = dyn.iterate(x, backward ? -n : n).theta;
            if (nearest(target, x) < half) return m;
        }
        return cap + 1;
    };
    auto times = parallel_sample_circle<int>(grid_n, [&](double t) {
        int m = 0;
        if (nearest(f.sigma_plus, t) >= half) m = std::max(m, entry(t, false));
        if (nearest(f.sigma_minus, t) >= half) m = std::max(m, entry(t, true));
        return m;
    });
    const int mmax = *std::max_element(times.begin(), times.end());
    if (mmax > cap) {
        std::ostringstream os;
        os << "N search exceeded " << cap << "*n (n=" << n << ", r=" << r << ")";
        throw EscapeError(os.str());
    }
    f.N = std::max(1, mmax) * n;

    auto marg = parallel_sample_circle<double>(grid_n, [&](double t) {
        const GammaValue g = dyn.iterate(t, f.N);
        return f.h0(t) - f.h0(g.theta) / g.deriv;
    });
    f.margin = *std::min_element(marg.begin(), marg.end());
    if (!(f.margin > 0.0)) {
        std::ostringstream os;
        os << "h0 - (h0 o b^N)/(b^N)' not positive: min " << f.margin << " (N=" << f.N << ")";
        throw EscapeError(os.str());
    }
    return f;
}

EscapeEvaluator::EscapeEvaluator(const Billiard& bil, X0Field x0, double scale)
    : bil_(&bil), x0_(std::move(x0)), scale_(scale) {}

double EscapeEvaluator::X0(double t) const { return scale_ * x0_.h0(t); }

double EscapeEvaluator::X1(double t) const {
    double acc = 0.0;
    GammaValue cur{frac(t), 1.0};
    for (int k = 0; k < x0_.N; ++k) {
        acc += x0_.h0(cur.theta) / cur.deriv;
        const GammaValue g = bil_->map(cur.theta, 1);
        cur.theta = g.theta;
        cur.deriv *= g.deriv;
    }
    return scale_ * acc;
}

double EscapeEvaluator::X(double t) const {
    const GammaValue gp = bil_->gamma(Sign::Plus, t);
    const GammaValue gm = bil_->gamma(Sign::Minus, t);
    return 2.0 * X1(t) + X1(gp.theta) / gp.deriv + X1(gm.theta) / gm.deriv;
}

double EscapeEvaluator::Y(Sign s, double t) const {
    const GammaValue g = bil_->gamma(s, t);
    return X(t) - X(g.theta) / g.deriv;
}

double EscapeEvaluator::D(double t) const {
    const GammaValue g = bil_->map(t, 1);
    return X1(t) - X1(g.theta) / g.deriv;
}

double truncated_Y(const Billiard& bil, const TrigSeries& h, Sign s, double t) {
    const GammaValue g = bil.gamma(s, t);
    return h.eval(t) - h.eval(g.theta) / g.deriv;
}

EscapeField build_escape_field(const Billiard& bil, const BilliardAnalysis& an, int grid_n, int max_modes) {
    if (!an.ms_verdict) throw EscapeError("MS false: " + an.reason);
    grid_n = std::max(grid_n, 4096);
    EscapeField ef;
    ef.x0 = build_X0(dynamics_of(bil, an), grid_n);
    ef.N = ef.x0.N;

    const EscapeEvaluator raw(bil, ef.x0);
    std::vector<double> xs = parallel_sample_circle<double>(grid_n, [&](double t) { return raw.X(t); });
    double mx = 0.0;
    for (double v : xs) mx = std::max(mx, std::abs(v));
    if (!(mx > 0.0)) throw EscapeError("escape field vanishes identically");
    ef.scale = 1.0 / mx;
    for (double& v : xs) v *= ef.scale;
    ef.samples = xs;

    const EscapeEvaluator ev(bil, ef.x0, ef.scale);
    // Y(t) = X(t) - X(g t)/g'(t), reusing the grid samples for X(t)
    auto yexact = [&](Sign s) {
        return parallel_map_index<double>(grid_n, [&](int j) {
            const GammaValue g = bil.gamma(s, static_cast<double>(j) / grid_n);
            return xs[j] - ev.X(g.theta) / g.deriv;
        });
    };
    const auto yp = yexact(Sign::Plus);
    const auto ym = yexact(Sign::Minus);
    ef.margin_plus = std::numeric_limits<double>::infinity();
    ef.margin_minus = std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid_n; ++j) {
        ef.margin_plus = std::min(ef.margin_plus, -yp[j]);
        ef.margin_minus = std::min(ef.margin_minus, ym[j]);
    }
    if (!(ef.margin_plus > 0.0 && ef.margin_minus > 0.0)) {
        std::ostringstream os;
        os << "orientation margins not positive: m+=" << ef.margin_plus << " m-=" << ef.margin_minus;
        throw EscapeError(os.str());
    }

    const double tol = 0.1 * std::min(ef.margin_plus, ef.margin_minus);
    max_modes = std::min(max_modes, grid_n / 2 - 1);
    for (int modes = 16;; modes = std::min(2 * modes, max_modes)) {
        TrigSeries h = TrigSeries::fit(xs, modes);
        const auto hv = parallel_sample_circle<double>(grid_n, [&](double t) { return h.eval(t); });
        double err = 0.0;
        for (int j = 0; j < grid_n; ++j) err = std::max(err, std::abs(hv[j] - xs[j]));
        if (err <= tol) {
            auto ytr = [&](Sign s) {
                return parallel_sample_circle<double>(grid_n, [&](double t) { return truncated_Y(bil, h, s, t); });
            };
            const auto tp = ytr(Sign::Plus);
            const auto tm = ytr(Sign::Minus);
            double mp = std::numeric_limits<double>::infinity(), mm = mp;
            for (int j = 0; j < grid_n; ++j) {
                mp = std::min(mp, -tp[j]);
                mm = std::min(mm, tm[j]);
            }
            if (mp > 0.0 && mm > 0.0) {
                ef.h = std::move(h);
                ef.modes = modes;
                ef.trunc_error = err;
                ef.trunc_margin_plus = mp;
                ef.trunc_margin_minus = mm;
                return ef;
            }
        }
        if (modes == max_modes) {
            std::ostringstream os;
            os << "margin lost after Fourier truncation at " << modes << " modes (error " << err << ", tol " << tol
               << ")";
            throw EscapeError(os.str());
        }
    }
}

}  // namespace iw
