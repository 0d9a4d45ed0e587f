#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "iwave/billiard.hpp"
#include "iwave/fourier.hpp"

namespace iw {

struct EscapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Circle functions and maps in the theta-trivialization (vector field h(theta) d/dtheta).
using CircleFn = std::function<double(double)>;
using CircleMapFn = std::function<GammaValue(double)>;

// (g*Y)(theta) = Y(g(theta)) / g'(theta)
CircleFn pullback(CircleMapFn g, CircleFn Y);

CircleMapFn map_gamma(const Billiard& bil, Sign s);
CircleMapFn map_power(const Billiard& bil, int k);

// Minimal description of a Morse-Smale circle map: b^k with derivative plus its periodic sets.
struct CircleDynamics {
    std::function<GammaValue(double, int)> iterate;
    std::vector<double> sigma_plus, sigma_minus;
    int period = 0;
};

CircleDynamics dynamics_of(const Billiard& bil, const BilliardAnalysis& an);

struct X0Field {
    std::vector<double> sigma_plus, sigma_minus;
    double r = 0.0;          // radius of the intervals U+-; V+- use r/2
    int n = 0;               // period
    int N = 0;               // multiple of n
    double sup_dbminus = 0.0;  // sup_{U+} (b^{-n})'
    double sup_dbplus = 0.0;   // sup_{U-} (b^n)'
    bool invariant = false;    // b^{-n}(U+) in U+ and b^n(U-) in U- on samples
    double margin = 0.0;       // min over the grid of h0 - (h0 o b^N)/(b^N)'
    int halvings = 0;

    double h0(double theta) const;
};

// Neighbourhoods by radius halving, smooth-step bump h0, and the smallest admissible N.
X0Field build_X0(const CircleDynamics& dyn, int grid_n = 4096);

// Exact (pre-truncation) evaluation of X0, X1 = sum_{k<N} (b^k)*X0, X = 2X1 + (g+)*X1 + (g-)*X1
// and Y+- = X - (g+-)*X, all scaled by `scale`.
class EscapeEvaluator {
public:
    EscapeEvaluator(const Billiard& bil, X0Field x0, double scale = 1.0);
    double X0(double t) const;
    double X1(double t) const;
    double X(double t) const;
    double Y(Sign s, double t) const;
    // X1 - b*X1
    double D(double t) const;
    const X0Field& x0() const { return x0_; }
    double scale() const { return scale_; }

private:
    const Billiard* bil_;
    X0Field x0_;
    double scale_;
};

struct EscapeField {
    TrigSeries h;              // truncated, normalized so that max|h| = 1 on the grid
    int N = 0;
    int modes = 0;
    double scale = 1.0;        // factor applied to the raw construction
    std::vector<double> samples;  // normalized X on the verification grid
    double margin_plus = 0.0;  // min(-Y+) before truncation
    double margin_minus = 0.0; // min(Y-) before truncation
    double trunc_margin_plus = 0.0;
    double trunc_margin_minus = 0.0;
    double trunc_error = 0.0;  // max |h_trunc - h| on the grid
    X0Field x0;

    bool ok() const {
        return margin_plus > 0 && margin_minus > 0 && trunc_margin_plus > 0 && trunc_margin_minus > 0;
    }
};

// Requires ms_verdict; throws EscapeError otherwise or when margins cannot be preserved.
EscapeField build_escape_field(const Billiard& bil, const BilliardAnalysis& an, int grid_n = 4096,
                               int max_modes = 2047);

// Y+- of the truncated field: h(t) - h(g(t))/g'(t) with g = gamma^+-.
double truncated_Y(const Billiard& bil, const TrigSeries& h, Sign s, double t);

}  // namespace iw
