#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "iwave/symbols.hpp"

using namespace iw;

namespace {

const double kLam = fx::kLam;

CMat2 random_jacobian(std::mt19937& rng, double imag) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    CMat2 J;
    J << cplx(2 + U(rng), imag * U(rng)), cplx(U(rng), imag * U(rng)), cplx(U(rng), imag * U(rng)),
        cplx(2 + U(rng), imag * U(rng));
    return J;
}

}  // namespace

TEST_CASE("flat symbol examples") {
    CHECK(std::abs(flat_symbols(kLam, 0.0, CVec2(1, 1)).p) < 1e-15);
    CHECK(std::abs(flat_symbols(kLam, 0.0, CVec2(1, 0)).p - 0.5) < 1e-15);
    CHECK(std::abs(flat_symbols(kLam, 0.0, CVec2(1, 1)).q - 4.0) < 1e-15);
    // sixth-order symbol: p + 2 i omega nu |xi|^4 - nu^2 |xi|^6
    const FlatSymbols s = flat_symbols(0.6, 0.1, CVec2(1, 2));
    CHECK(std::abs(s.A6 - (s.p + cplx(0, 2 * 0.6 * 0.1 * 25.0) - 0.01 * 125.0)) < 1e-13);
    CHECK(std::abs(s.A - (s.p + cplx(0, 0.6 * 0.1 * 25.0))) < 1e-13);
}

TEST_CASE("factored and expanded p agree") {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    double e = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const cplx w(0.05 + 0.9 * (U(rng) + 3) / 6, 0.5 * (U(rng) + 3) / 6);
        const CVec2 xi(U(rng), U(rng));
        const cplx a = flat_symbols(w, 0.0, xi).p, b = p_factored(w, xi);
        e = std::max(e, std::abs(a - b) / (1.0 + xi.squaredNorm()));
    }
    CHECK(e < 1e-12);
    CHECK_THROWS_AS(p_factored(cplx(1.5, 0.0), CVec2(1, 0)), DomainError);
}

TEST_CASE("deformed symbol") {
    const Vec2 xi(0.3, -1.1);
    for (SymbolKind k : {SymbolKind::P, SymbolKind::Q, SymbolKind::A, SymbolKind::A6}) {
        const FlatSymbols f = flat_symbols(cplx(kLam, 0.1), 0.01, xi.cast<cplx>());
        const cplx want = k == SymbolKind::P ? f.p : k == SymbolKind::Q ? f.q : k == SymbolKind::A ? f.A : f.A6;
        CHECK(std::abs(deformed_symbol(CMat2::Identity(), k, cplx(kLam, 0.1), 0.01, xi) - want) < 1e-14);
    }
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double cramer = 0.0, homog = 0.0, homog4 = 0.0, contra = 0.0;
    for (int n = 0; n < 200; ++n) {
        const CMat2 J = random_jacobian(rng, n % 2 ? 0.0 : 0.2), K = random_jacobian(rng, 0.2);
        const Vec2 x(U(rng), U(rng));
        const double lam = 0.2 + 0.6 * (U(rng) + 1) / 2;
        const cplx a = deformed_symbol(J, SymbolKind::P, lam, 0.0, x), b = deformed_p_cramer(J, lam, x);
        cramer = std::max(cramer, std::abs(a - b) / std::abs(a));
        const double s = 2.7;
        homog = std::max(homog, std::abs(deformed_symbol(J, SymbolKind::P, lam, 0.0, s * x) - s * s * a) / std::abs(a));
        const cplx q = deformed_symbol(J, SymbolKind::Q, lam, 0.0, x);
        homog4 = std::max(homog4, std::abs(deformed_symbol(J, SymbolKind::Q, lam, 0.0, s * x) - std::pow(s, 4) * q) /
                                      std::abs(q));
        // (K J)^{-T} xi = K^{-T} (J^{-T} xi)
        const CVec2 lhs = pushforward_covector(K * J, x.cast<cplx>());
        const CVec2 rhs = pushforward_covector(K, pushforward_covector(J, x.cast<cplx>()));
        contra = std::max(contra, (lhs - rhs).norm() / lhs.norm());
    }
    CHECK(cramer < 1e-10);
    CHECK(homog < 1e-10);
    CHECK(homog4 < 1e-10);
    CHECK(contra < 1e-10);
    CHECK_THROWS_AS(deformed_symbol(CMat2::Zero(), SymbolKind::P, kLam, 0.0, Vec2(1, 0)), DeformationError);
}

TEST_CASE("inviscid inequality degenerates at tau = 0") {
    // characteristic covector: both sides vanish
    const Vec2 xi = Vec2(1, 1).normalized();
    CHECK(std::abs(inviscid_slack(CMat2::Identity(), kLam, xi, 0.0, 10.0)) < 1e-15);
    const auto& F = fx::figure1();
    EllipticityOptions opt;
    opt.im_lo = opt.im_hi = 0.0;
    opt.re_n = opt.im_n = 1;
    opt.grid_n = 12;
    const EllipticityCertificate c = certify_ellipticity(F.dm.with_tau(0.0), opt);
    // J at tau = 0 is the identity only to ~1e-10 (implicit differentiation of the chord roots)
    CHECK(std::abs(c.inviscid_slack) < 1e-9);
}

TEST_CASE("singular ellipticity at the identity") {
    const double r = singular_ratio(CMat2::Identity(), kLam, 1.0, Vec2(1, 0));
    // |p + i lambda| / (1 (1 + 1)) with p = 1/2
    CHECK(r == doctest::Approx(std::abs(cplx(0.5, kLam)) / 2.0));
    CHECK(r * 2.0 >= kLam);
}

TEST_CASE("Figure-1 ellipticity certificate") {
    const auto& F = fx::figure1();
    const EllipticityCertificate c = certify_ellipticity(F.dm);
    CHECK(c.inviscid_pass);
    CHECK(std::isfinite(c.C0));
    CHECK(c.C0 <= 1e6);
    CHECK(c.inviscid_slack >= 0.0);
    CHECK(c.asymptotic_slack >= 0.0);
    CHECK(c.singular_pass);
    CHECK(c.singular_cinv > 0.0);
    CHECK(c.pass());
}

TEST_CASE("inviscid slack is nondecreasing in Im omega") {
    const auto& F = fx::figure1();
    const EllipticityCertificate c = certify_ellipticity(F.dm);
    const double C0 = c.C0;
    int bad = 0;
    for (const Vec2& x : interior_grid(F.bil.domain(), 10)) {
        const CMat2 J = F.dm.eval(x).J;
        for (int k = 0; k < 16; ++k) {
            const Vec2 xi(std::cos(kPi * (k + 0.5) / 16), std::sin(kPi * (k + 0.5) / 16));
            double prev = -1e300;
            for (double im : {0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1e4}) {
                const double s = inviscid_slack(J, cplx(kLam, im), xi, F.dm.tau(), C0);
                bad += s < prev - 1e-12;
                prev = s;
            }
        }
    }
    CHECK(bad == 0);
}

TEST_CASE("coercivity roots in the flat case") {
    const Vec2 xi(0.8, 0.3), n = Vec2(0.2, 1.0).normalized();
    const CoercivityReport r = coercivity_roots(CMat2::Identity(), kLam, xi, n, 1e-3);
    CHECK(r.counts[0].upper == 2);
    CHECK(r.counts[0].lower == 2);
    const double dot = xi.dot(n), wedge = std::abs(xi(0) * n(1) - xi(1) * n(0));
    for (const cplx& z : r.counts[0].roots) CHECK(std::abs(std::abs(z - dot * -1.0) - wedge) < 1e-6);
    // (ii) p is real hyperbolic: real roots
    CHECK(r.counts[1].indeterminate);
}

TEST_CASE("coercivity roots on the Figure-1 boundary") {
    const auto& F = fx::figure1();
    int ok = 0;
    for (int j = 0; j < 16; ++j) {
        const double th = j / 16.0;
        const Vec2 t = F.bil.domain().z(th, 1).normalized();
        const CoercivityReport r = coercivity_roots(F.dm, th, t, 1e-3);
        ok += r.pass();
        // scaling the tangential covector keeps the counts
        const CoercivityReport s = coercivity_roots(F.dm, th, 3.0 * t, 1e-3);
        for (int k = 0; k < 4; ++k) {
            CHECK(s.counts[k].upper == r.counts[k].upper);
            CHECK(s.counts[k].lower == r.counts[k].lower);
        }
    }
    CHECK(ok == 16);
    // boundary-layer polynomial (iv) alone
    const CoercivityReport r = coercivity_roots(F.dm, 0.3, F.bil.domain().z(0.3, 1).normalized(), 1e-3);
    CHECK(r.counts[3].upper == 1);
    CHECK(r.counts[3].lower == 1);
    CHECK_FALSE(r.counts[3].indeterminate);
}

TEST_CASE("polynomial roots") {
    // (z - 1)(z + 2)(z - i) = z^3 + (1 - i) z^2 + (-2 - i) z + 2i
    const auto r = polynomial_roots({cplx(0, 2), cplx(-2, -1), cplx(1, -1), 1.0});
    REQUIRE(r.size() == 3);
    const RootCount c = count_roots({cplx(0, 2), cplx(-2, -1), cplx(1, -1), 1.0});
    CHECK(c.indeterminate);
    CHECK(c.upper == 1);
    const RootCount d = count_roots({1.0, 0.0, 1.0});  // z^2 + 1
    CHECK(d.upper == 1);
    CHECK(d.lower == 1);
    CHECK_FALSE(d.indeterminate);
}

TEST_CASE("parameter-dependent norms") {
    CHECK(param_weight(1, 2, 0.01, Vec2(10, 0)) == doctest::Approx(404.0).epsilon(1e-14));
    std::vector<Vec2> xi;
    std::vector<double> mag;
    for (int a = -8; a <= 8; ++a)
        for (int b = -8; b <= 8; ++b) {
            xi.emplace_back(a, b);
            mag.push_back(std::exp(-0.1 * (a * a + b * b)));
        }
    const double cell = 1.0;
    CHECK(param_norm(1, 1, 1.0, xi, mag, cell) / param_norm(2, 0, 0.3, xi, mag, cell) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(param_norm(1.5, 0, 0.3, xi, mag, cell) == param_norm(1.5, 0, 0.001, xi, mag, cell));
    CHECK(param_norm(1, 1, 0.1, xi, mag, cell) <= param_norm(2, 1, 0.1, xi, mag, cell));
    CHECK(param_norm(1, 1, 0.1, xi, mag, cell) <= param_norm(1, 2, 0.1, xi, mag, cell));
}
