#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "iwave/billiard.hpp"

using namespace iw;

namespace {

std::vector<double> random_thetas(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> v(n);
    for (double& t : v) t = U(rng);
    return v;
}

const Billiard& by_index(int k) {
    if (k == 0) return fx::circle();
    if (k == 1) return fx::ellipse();
    return fx::figure1().bil;
}

}  // namespace

TEST_CASE("circle involutions in closed form") {
    const Billiard& c = fx::circle();
    GammaValue g = c.gamma(Sign::Plus, 0.0);
    CHECK(std::abs(g.theta - 0.25) < 1e-12);
    CHECK(std::abs(g.deriv + 1.0) < 1e-10);
    g = c.gamma(Sign::Minus, 0.0);
    CHECK(std::abs(g.theta - 0.75) < 1e-12);
    CHECK(std::abs(g.deriv + 1.0) < 1e-10);
    for (double t : random_thetas(200, 1)) {
        CHECK(circle_distance(c.gamma(Sign::Plus, t).theta, frac(0.25 - t)) < 1e-10);
        CHECK(circle_distance(c.gamma(Sign::Minus, t).theta, frac(0.75 - t)) < 1e-10);
        const GammaValue b = c.map(t, 1);
        CHECK(circle_distance(b.theta, frac(t + 0.5)) < 1e-10);
        CHECK(std::abs(b.deriv - 1.0) < 1e-9);
    }
}

TEST_CASE("involution, level preservation and orientation on every preset") {
    for (int k = 0; k < 3; ++k) {
        CAPTURE(k);
        const Billiard& bil = by_index(k);
        double inv = 0.0, lev = 0.0;
        int bad_orient = 0;
        for (double t : random_thetas(1000, 10 + k))
            for (Sign s : {Sign::Plus, Sign::Minus}) {
                const GammaValue g = bil.gamma(s, t);
                inv = std::max(inv, circle_distance(bil.gamma(s, g.theta).theta, t));
                lev = std::max(lev, std::abs(bil.level(s, g.theta) - bil.level(s, t)));
                if (circle_distance(g.theta, t) > 1e-6 && !(g.deriv < 0.0)) ++bad_orient;
                if (!(bil.map(t, 1).deriv > 0.0)) ++bad_orient;
            }
        CHECK(inv < 1e-10);
        CHECK(lev < 1e-10);
        CHECK(bad_orient == 0);
    }
}

TEST_CASE("characteristic points are fixed by gamma") {
    const Billiard& bil = fx::figure1().bil;
    for (Sign s : {Sign::Plus, Sign::Minus}) {
        const auto [a, b] = bil.critical(s);
        CHECK(circle_distance(bil.gamma(s, a).theta, a) < 1e-10);
        CHECK(circle_distance(bil.gamma(s, b).theta, b) < 1e-10);
        CHECK(bil.gamma(s, a).deriv == doctest::Approx(-1.0).epsilon(1e-6));
        // gamma' is continuous across the Morse window edge: a jump would show in the second difference
        const double e = 1e-6;
        const double d2 = bil.gamma(s, a + 1e-4 - e).deriv - 2.0 * bil.gamma(s, a + 1e-4).deriv +
                          bil.gamma(s, a + 1e-4 + e).deriv;
        CHECK(std::abs(d2) < 1e-7);
    }
}

TEST_CASE("billiard map inverse and chain rule") {
    for (int k = 0; k < 3; ++k) {
        const Billiard& bil = by_index(k);
        double inv = 0.0, chain = 0.0;
        for (double t : random_thetas(300, 20 + k)) {
            const GammaValue b = bil.map(t, 1);
            inv = std::max(inv, circle_distance(bil.map(b.theta, -1).theta, t));
            const GammaValue b2 = bil.map(t, 2), b3 = bil.map(t, 3);
            const double prod = bil.map(b2.theta, 1).deriv * bil.map(b.theta, 1).deriv * b.deriv;
            chain = std::max(chain, std::abs(b3.deriv - prod) / prod);
            CHECK(circle_distance(b3.theta, bil.map(b2.theta, 1).theta) < 1e-10);
        }
        CHECK(inv < 1e-10);
        CHECK(chain < 1e-10);
    }
}

TEST_CASE("circle is not Morse-Smale") {
    const BilliardAnalysis an = analyze_dynamics(fx::circle());
    CHECK(an.rational);
    CHECK(an.q == 2);
    CHECK_FALSE(an.ms_verdict);
    CHECK(an.reason.find("identity") != std::string::npos);
}

TEST_CASE("Figure-1 domain is Morse-Smale") {
    const BilliardAnalysis& an = fx::figure1().an;
    const Billiard& bil = fx::figure1().bil;
    CHECK(an.ms_verdict);
    CHECK_FALSE(an.sigma_plus.empty());
    CHECK_FALSE(an.sigma_minus.empty());
    const int n = an.period;
    REQUIRE(n > 0);
    for (const auto& p : an.sigma_plus) {
        CHECK(p.multiplier > 1.0);
        CHECK(std::abs(std::log(p.multiplier)) > 1e-3);
        CHECK(circle_distance(bil.map(p.theta, n).theta, p.theta) < 1e-9);
    }
    for (const auto& p : an.sigma_minus) {
        CHECK(p.multiplier > 0.0);
        CHECK(p.multiplier < 1.0);
        CHECK(std::abs(std::log(p.multiplier)) > 1e-3);
        CHECK(circle_distance(bil.map(p.theta, n).theta, p.theta) < 1e-9);
    }
    // multiplier reciprocity
    for (const auto* set : {&an.sigma_plus, &an.sigma_minus})
        for (const auto& p : *set) CHECK(std::abs(p.multiplier * bil.map(p.theta, -n).deriv - 1.0) < 1e-8);
    // common minimal period: no point returns earlier
    for (const auto& p : an.sigma_minus)
        for (int d = 1; d < n; ++d) CHECK(circle_distance(bil.map(p.theta, d).theta, p.theta) > 1e-6);
    CHECK(an.sign_samples > 1000);
    CHECK(an.sign_violations == 0);
}

TEST_CASE("sign relations on random samples") {
    const Billiard& bil = fx::figure1().bil;
    const Domain& dom = bil.domain();
    int checked = 0, bad = 0;
    for (double t : random_thetas(1000, 5))
        for (Sign s : {Sign::Plus, Sign::Minus}) {
            const int m = bil.mu(s, t);
            if (m == 0) continue;
            const double g = bil.gamma(s, t).theta;
            const double l = linear_form(dom.lambda(), other(s), Vec2(dom.z(g) - dom.z(t)));
            if (l == 0.0) continue;
            ++checked;
            bad += ((l > 0) ? 1 : -1) != sgn(s) * m;
            bad += bil.mu(s, g) != -m;
        }
    CHECK(checked > 1500);
    CHECK(bad == 0);
}

TEST_CASE("trajectories") {
    const Trajectory q = trajectory(fx::circle(), 0.1, 4);
    REQUIRE(q.points.size() == 5);
    CHECK((q.points[4] - q.points[0]).norm() < 1e-10);
    CHECK(q.max_direction_error < 1e-8);

    const Billiard& bil = fx::figure1().bil;
    const BilliardAnalysis& an = fx::figure1().an;
    const Trajectory t = trajectory(bil, 0.1, 200);
    CHECK(t.max_direction_error < 1e-8);
    // the tail of the orbit sits on the attracting cycle (even entries are the b iterates)
    double tail = 0.0;
    for (size_t k = t.theta.size() - 21; k < t.theta.size(); k += 2) {
        double d = 1.0;
        for (const auto& p : an.sigma_minus) d = std::min(d, circle_distance(t.theta[k], p.theta));
        tail = std::max(tail, d);
    }
    // odd iterates sit on gamma^- images of the cycle instead
    double tail_odd = 0.0;
    for (size_t k = t.theta.size() - 20; k < t.theta.size(); k += 2) {
        double d = 1.0;
        for (const auto& p : an.sigma_minus)
            d = std::min(d, circle_distance(t.theta[k], bil.gamma(Sign::Minus, p.theta).theta));
        tail_odd = std::max(tail_odd, d);
    }
    CHECK(tail < 1e-6);
    CHECK(tail_odd < 1e-6);
}

TEST_CASE("forward orbits reach the attractor") {
    const Billiard& bil = fx::figure1().bil;
    const BilliardAnalysis& an = fx::figure1().an;
    const int m0 = escape_iterations(bil, an, 0.01, 1000, 5000);
    CHECK(m0 >= 0);
    const int m1 = escape_iterations(bil, an, 0.01, 1000, 5000, true);
    CHECK(m1 >= 0);
}

TEST_CASE("ellipse dynamics") {
    // an affine image of the circle: b is conjugate to a rigid rotation, never Morse-Smale
    const BilliardAnalysis an = analyze_dynamics(fx::ellipse());
    CHECK_FALSE(an.ms_verdict);
}
