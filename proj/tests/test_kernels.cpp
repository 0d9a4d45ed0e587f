#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "iwave/kernels.hpp"
#include "iwave/parallel.hpp"

using namespace iw;

// Every serial/parallel pair must agree bitwise: the loops are per-element with no reductions
// across threads, except the pair-ratio minimum, which is order independent.

TEST_CASE("sample and map helpers") {
    auto f = [](double t) { return std::sin(7 * t) + t * t; };
    CHECK(serial_sample_circle<double>(1000, f) == parallel_sample_circle<double>(1000, f));
    auto g = [](int i) { return i * i - 3; };
    CHECK(serial_map_index<int>(777, g) == parallel_map_index<int>(777, g));
}

TEST_CASE("b^2 graph") {
    const Billiard& bil = fx::figure1().bil;
    const auto a = serial_b2_graph(bil, 512), b = parallel_b2_graph(bil, 512);
    REQUIRE(a.size() == b.size());
    for (size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].theta == b[k].theta);
        CHECK(a[k].deriv == b[k].deriv);
    }
}

TEST_CASE("deformation grid") {
    const auto& F = fx::figure1();
    const auto pts = interior_grid(F.bil.domain(), 20);
    const auto a = serial_deformation_grid(F.dm, pts), b = parallel_deformation_grid(F.dm, pts);
    REQUIRE(a.size() == pts.size());
    REQUIRE(b.size() == pts.size());
    for (size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].xi == b[k].xi);
        CHECK(a[k].J == b[k].J);
    }
}

TEST_CASE("minimum pair ratio") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<Vec2> x(300);
    std::vector<cplx> g(300);
    for (size_t k = 0; k < x.size(); ++k) {
        x[k] = Vec2(U(rng), U(rng));
        g[k] = cplx(x[k](0) + 0.1 * U(rng), x[k](1));
    }
    const double a = serial_min_pair_ratio(x, g), b = parallel_min_pair_ratio(x, g);
    CHECK(a == b);
    // brute force
    double m = 1e300;
    for (size_t i = 0; i < x.size(); ++i)
        for (size_t j = i + 1; j < x.size(); ++j) m = std::min(m, std::abs(g[i] - g[j]) / (x[i] - x[j]).norm());
    CHECK(a == m);
}

TEST_CASE("Nystrom assembly") {
    const auto& F = fx::figure1();
    const NystromSystem sys = layer_ops(F.dm, 96);
    const Eigen::MatrixXcd a = serial_nystrom_assemble(sys), b = parallel_nystrom_assemble(sys);
    CHECK(a.rows() == 96);
    CHECK(a == b);
}

TEST_CASE("symbol samples") {
    const auto& F = fx::figure1();
    std::vector<CMat2> Js;
    for (const Vec2& x : interior_grid(F.bil.domain(), 8)) Js.push_back(F.dm.eval(x).J);
    std::vector<Vec2> dirs;
    for (int k = 0; k < 12; ++k) dirs.emplace_back(std::cos(kPi * k / 12), std::sin(kPi * k / 12));
    const std::vector<cplx> omegas{cplx(0.69, 0.0), cplx(0.72, 0.2)};
    const auto a = serial_inviscid_samples(Js, omegas, dirs, 0.02);
    const auto b = parallel_inviscid_samples(Js, omegas, dirs, 0.02);
    REQUIRE(a.size() == Js.size() * omegas.size() * dirs.size());
    REQUIRE(b.size() == a.size());
    for (size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].im == b[k].im);
        CHECK(a[k].abs_re == b[k].abs_re);
        CHECK(a[k].rhs == b[k].rhs);
    }
    const std::vector<double> ts{0.0, 0.1, 1.0, 10.0, 100.0};
    CHECK(serial_singular_samples(Js, fx::kLam, dirs, ts) == parallel_singular_samples(Js, fx::kLam, dirs, ts));
}

TEST_CASE("sigma_min cells") {
    const Domain dom(preset_by_name("superellipse4", fx::kLam));
    const auto P = operator_pieces(dom, fitted_grid(dom, 16, 16));
    const std::vector<std::pair<cplx, double>> jobs{
        {cplx(fx::kLam, 0.0), 1e-3}, {cplx(fx::kLam, 0.02), 1e-4}, {cplx(0.69, -0.02), 1e-3}};
    const auto a = serial_sigma_cells(P, jobs), b = parallel_sigma_cells(P, jobs);
    REQUIRE(a.size() == 3);
    for (size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].omega == jobs[k].first);
        CHECK(a[k].raw == b[k].raw);
        CHECK(a[k].scaled == b[k].scaled);
        CHECK(a[k].converged == b[k].converged);
    }
}
