#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "iwave/geometry.hpp"

namespace iw {

struct GammaValue {
    double theta = 0.0;  // in [0,1)
    double deriv = 0.0;
};

// Chess billiard on a lambda-simple domain: the involutions gamma^+-, the map
// b = gamma^+ o gamma^-, and its inverse gamma^- o gamma^+.
class Billiard {
public:
    // Throws GeometryError when the domain is not lambda-simple.
    explicit Billiard(Domain dom, double morse_window = 1e-4);

    const Domain& domain() const { return dom_; }
    double lambda() const { return dom_.lambda(); }
    const CharacteristicSet& characteristic() const { return chars_; }
    // The two characteristic parameters of l^sign o z: [0] = minimum, [1] = maximum.
    std::pair<double, double> critical(Sign s) const;

    GammaValue gamma(Sign s, double theta) const;
    // b^k(theta) in [0,1) and (b^k)'(theta); negative k iterates gamma^- o gamma^+.
    GammaValue map(double theta, int k) const;
    // mu^sign(theta) = sign l^sign(z'(theta)) in {-1, 0, 1}
    int mu(Sign s, double theta) const;
    double level(Sign s, double theta) const { return dom_.level(s).eval(theta); }

    // Lift displacement of b on [0,1): a continuous representative of b(theta) - theta.
    double lift_displacement(double theta) const;

private:
    struct Crit {
        double tmin, tmax;      // parameters of min / max of l o z
        double fmin, fmax;
        double dmin[5], dmax[5];  // derivatives 0..4 at the critical points
    };
    GammaValue morse(const double* d, double tc, double t) const;
    void build_lift();

    Domain dom_;
    CharacteristicSet chars_;
    Crit crit_[2];
    double window_;
    std::vector<double> lift_;  // unwrapped displacement on a uniform grid
};

struct PeriodicPoint {
    double theta = 0.0;
    double multiplier = 0.0;  // (b^n)'(theta)
};

struct BilliardAnalysis {
    double rotation_number = 0.0;
    bool rational = false;
    int p = 0, q = 0;
    int period = 0;  // common minimal period n
    std::vector<PeriodicPoint> sigma_plus;   // (b^n)' > 1
    std::vector<PeriodicPoint> sigma_minus;  // (b^n)' < 1
    std::vector<PeriodicPoint> neutral;      // |log (b^n)'| below the margin
    bool ms_verdict = false;
    double margin = 0.0;  // min |log (b^n)'|
    std::string reason;
    int sign_samples = 0;
    int sign_violations = 0;
};

// Rotation number by lift averaging; rational acceptance |rho - p/q| < 1/(2 q grid_n) over
// continued-fraction convergents; periodic points from sign changes of b^q(theta) - theta - p.
BilliardAnalysis analyze_dynamics(const Billiard& bil, int grid_n = 2048, int max_iter = 20000,
                                  double log_margin = 1e-6);

struct Trajectory {
    std::vector<double> theta;
    std::vector<Vec2> points;
    // max over chords of |sin(angle between chord and its expected direction L^-+)|
    double max_direction_error = 0.0;
};

// theta_{k+1} = gamma^-(theta_k) for even k and gamma^+(theta_k) for odd k, so each pair of
// steps applies b. Even chords are parallel to L^+, odd chords to L^-.
Trajectory trajectory(const Billiard& bil, double theta0, int steps);

// Largest number of iterations needed by forward orbits of `samples` uniform points to
// enter the radius-r neighbourhood of Sigma_- (backward orbits for Sigma_+ when sign is +).
// Points within r of the opposite set are skipped. Returns -1 if some orbit does not enter
// within max_iter.
int escape_iterations(const Billiard& bil, const BilliardAnalysis& an, double r, int samples, int max_iter,
                      bool backward = false);

double circle_distance(double a, double b);
inline double frac(double t) { return t - std::floor(t); }

}  // namespace iw
