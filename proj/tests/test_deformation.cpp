#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "iwave/deformation.hpp"

using namespace iw;

namespace {

DeformationMap circle_map(double tau) {
    return DeformationMap(fx::circle(), TrigSeries({1.0}, {0.0}), tau);
}

}  // namespace

TEST_CASE("boundary deformation examples") {
    const DeformationMap dm = circle_map(0.1);
    const CVec2 z = dm.boundary(0.0);
    CHECK(std::abs(z(0) - std::cosh(0.2 * kPi)) < 1e-12);
    CHECK(std::abs(z(1) - cplx(0.0, std::sinh(0.2 * kPi))) < 1e-12);

    const auto& F = fx::figure1();
    const DeformationMap d0 = F.dm.with_tau(0.0);
    for (double t : {0.0, 0.21, 0.5, 0.93}) {
        const CVec2 b = d0.boundary(t);
        CHECK((b - F.bil.domain().z(t).cast<cplx>()).norm() < 1e-15);
        // conjugacy
        const CVec2 p = F.dm.boundary(t), m = F.dm.with_tau(-0.02).boundary(t);
        CHECK((p.conjugate() - m).norm() < 1e-14);
    }
    CHECK_THROWS_AS(circle_map(0.2).boundary(0.0), DomainError);
}

TEST_CASE("up/down pairs on the circle") {
    const DeformationMap dm = circle_map(0.02);
    const UpDownPair p = dm.updown(Sign::Plus, Vec2(0, 0));
    // chord {x1 + x2 = 0} meets the circle at 3pi/4 and 7pi/4
    CHECK(std::abs(p.theta_down - 0.875) < 1e-10);
    CHECK(std::abs(p.theta_up - 0.375) < 1e-10);
    const Domain& d = fx::circle().domain();
    CHECK(linear_form(d.lambda(), Sign::Minus, d.z(p.theta_down)) <=
          linear_form(d.lambda(), Sign::Minus, d.z(p.theta_up)));
    CHECK_THROWS_AS(dm.updown(Sign::Plus, Vec2(1.5, 0.0)), DomainError);
}

TEST_CASE("up/down invariants on the Figure-1 domain") {
    const auto& F = fx::figure1();
    const Domain& d = F.bil.domain();
    const double lam = d.lambda();
    for (const Vec2& x : interior_grid(d, 12))
        for (Sign s : {Sign::Plus, Sign::Minus}) {
            const UpDownPair p = F.dm.updown(s, x);
            CHECK(std::abs(linear_form(lam, s, d.z(p.theta_down)) - linear_form(lam, s, x)) < 1e-10);
            CHECK(std::abs(linear_form(lam, s, d.z(p.theta_up)) - linear_form(lam, s, x)) < 1e-10);
            CHECK(linear_form(lam, other(s), d.z(p.theta_down)) <= linear_form(lam, other(s), d.z(p.theta_up)));
        }
    // boundary point: one of the pair is its own parameter
    for (double t : {0.05, 0.3, 0.61, 0.88})
        for (Sign s : {Sign::Plus, Sign::Minus}) {
            const UpDownPair p = F.dm.updown(s, d.z(t));
            CHECK(std::min(circle_distance(p.theta_down, t), circle_distance(p.theta_up, t)) < 1e-10);
        }
    // characteristic point: coincident pair
    for (Sign s : {Sign::Plus, Sign::Minus}) {
        const double tc = F.bil.critical(s).first;
        const UpDownPair p = F.dm.updown(s, d.z(tc));
        CHECK(circle_distance(p.theta_down, p.theta_up) < 1e-6);
    }
}

TEST_CASE("identity at tau = 0") {
    const auto& F = fx::figure1();
    const DeformationMap d0 = F.dm.with_tau(0.0);
    double ex = 0.0, ej = 0.0;
    for (const Vec2& x : interior_grid(F.bil.domain(), 24)) {
        const XiValue v = d0.eval(x);
        ex = std::max(ex, (v.xi - x.cast<cplx>()).norm());
        ej = std::max(ej, (v.J - CMat2::Identity()).norm());
    }
    CHECK(ex < 1e-12);
    // D_x Xi goes through implicit differentiation of the chord roots
    CHECK(ej < 1e-9);
}

TEST_CASE("extension matches the boundary deformation and the basis duality") {
    const auto& F = fx::figure1();
    const double lam = F.dm.lambda();
    double eb = 0.0;
    for (int j = 0; j < 200; ++j) {
        const double t = j / 200.0 + 0.001;
        eb = std::max(eb, (F.dm.xi(F.bil.domain().z(t)) - F.dm.boundary(t)).norm());
    }
    CHECK(eb < 1e-10);
    for (const Vec2& x : interior_grid(F.bil.domain(), 10)) {
        const XiValue v = F.dm.eval(x);
        CHECK(std::abs(linear_form(cplx(lam), Sign::Plus, v.xi) - v.g[0]) < 1e-12);
        CHECK(std::abs(linear_form(cplx(lam), Sign::Minus, v.xi) - v.g[1]) < 1e-12);
    }
}

TEST_CASE("Jacobian against central differences") {
    const auto& F = fx::figure1();
    double e = 0.0;
    const double h = 1e-6;
    for (const Vec2& x : interior_grid(F.bil.domain(), 16)) {
        const XiValue v = F.dm.eval(x);
        for (int k = 0; k < 2; ++k) {
            Vec2 dx = Vec2::Zero();
            dx(k) = h;
            const CVec2 fd = (F.dm.xi(x + dx) - F.dm.xi(x - dx)) / (2 * h);
            e = std::max(e, (fd - v.J.col(k)).norm());
        }
    }
    CHECK(e < 1e-6);
}

TEST_CASE("continuity across the tangency seam") {
    const auto& F = fx::figure1();
    double es = 0.0;
    for (Sign s : {Sign::Plus, Sign::Minus})
        for (int k = 0; k < 2; ++k) {
            const Tangency tg = F.dm.tangency(s, k);
            const double c = tg.value + (k == 0 ? 1 : -1) * 1e-3 * std::abs(tg.alpha);
            const auto r = F.dm.level_roots(s, c);
            const Vec2 mid = 0.5 * (F.bil.domain().z(r[0]) + F.bil.domain().z(r[1]));
            const DeformationMap a(F.bil, F.ef.h, 0.02, 1e-3 * (1 + 1e-9)), b(F.bil, F.ef.h, 0.02, 1e-3 * (1 - 1e-9));
            CHECK(a.eval(mid).morse[idx(s)] != b.eval(mid).morse[idx(s)]);
            es = std::max(es, (a.xi(mid) - b.xi(mid)).norm());
        }
    CHECK(es < 1e-8);
}

TEST_CASE("Figure-1 certificate at tau = 0.02") {
    const auto& F = fx::figure1();
    const DeformationCertificate c = verify_deformation(F.dm, 32);
    CHECK(c.samples > 500);
    CHECK(c.min_im[0] > 0.0);
    CHECK(c.min_im[1] > 0.0);
    CHECK(c.same_sign);
    CHECK(c.max_re_ratio[0] < 1e-3);
    CHECK(c.max_re_ratio[1] < 1e-3);
    CHECK(c.transversal);
    CHECK(c.injective);
    CHECK(c.totally_real);
    CHECK(c.pass());
    CHECK(max_admissible_tau(F.dm) >= 0.02);
}

TEST_CASE("transversality matches the closed formula") {
    const auto& F = fx::figure1();
    // Im of the slope is odd in tau, so a tiny tau gives the derivative directly
    const DeformationMap dp = F.dm.with_tau(1e-5);
    double e = 0.0;
    for (const Vec2& x : interior_grid(F.bil.domain(), 16))
        for (Sign s : {Sign::Plus, Sign::Minus}) {
            const cplx T(0.0, dp.slope(s, x).imag() / 1e-5);
            e = std::max(e, std::abs(T - F.dm.transversality_formula(s, x)) / std::abs(T));
        }
    CHECK(e < 1e-6);
}

TEST_CASE("deformation size is linear in tau") {
    const auto& F = fx::figure1();
    const auto pts = interior_grid(F.bil.domain(), 16);
    std::vector<double> slope;
    for (double tau : {1e-2, 5e-3, 2.5e-3}) {
        const DeformationMap d = F.dm.with_tau(tau);
        double m = 0.0;
        for (const Vec2& x : pts) m = std::max(m, (d.xi(x) - x.cast<cplx>()).norm());
        slope.push_back(m / tau);
    }
    CHECK(std::abs(slope[0] / slope[1] - 1.0) < 0.2);
    CHECK(std::abs(slope[1] / slope[2] - 1.0) < 0.2);
}

TEST_CASE("realification") {
    const Eigen::Matrix4d R = realification(CMat2::Identity());
    CHECK(std::abs(R.determinant()) == doctest::Approx(1.0));
    CMat2 real = CMat2::Zero();
    real << 1.0, 2.0, 3.0, 4.0;
    CHECK(std::abs(realification(real).determinant()) == doctest::Approx(4.0));
    CMat2 degenerate;
    degenerate << cplx(1, 1), cplx(0, 0), cplx(0, 0), cplx(0, 0);
    CHECK(std::abs(realification(degenerate).determinant()) < 1e-14);
}
