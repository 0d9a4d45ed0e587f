#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "iwave/solver.hpp"

using namespace iw;

namespace {

const double kLam = fx::kLam;

const Domain& disk() {
    static const Domain d(preset_circle(kLam));
    return d;
}

const Domain& square4() {
    static const Domain d(preset_by_name("superellipse4", kLam));
    return d;
}

double rel_diff(const SpMat& a, const SpMat& b) {
    return SpMat(a - b).norm() / a.norm();
}

int max_row_nnz(const SpMat& A) {
    std::vector<int> cnt(A.rows(), 0);
    for (int c = 0; c < A.outerSize(); ++c)
        for (SpMat::InnerIterator it(A, c); it; ++it)
            if (it.value() != cplx(0.0)) ++cnt[it.row()];
    return *std::max_element(cnt.begin(), cnt.end());
}

// max over interior rows with 0.3 < r < 0.7 of |(A u)_k - want|
double interior_defect(const DiscreteOperator& op, const CVec& u, cplx want) {
    const FittedGrid& g = op.grid();
    const CVec Au = op.A * u;
    double e = 0.0;
    for (int i = 0; i + 1 < g.n_r; ++i)
        if (g.r(i) > 0.3 && g.r(i) < 0.7)
            for (int j = 0; j < g.n_theta; ++j) e = std::max(e, std::abs(Au(g.index(i, j)) - want));
    return e;
}

}  // namespace

TEST_CASE("fitted grid") {
    CHECK_THROWS_AS(fitted_grid(disk(), 7, 16), SolverError);
    CHECK_THROWS_AS(fitted_grid(disk(), 16, 4), SolverError);
    const FittedGrid g = fitted_grid(square4(), 16, 24);
    CHECK(g.unknowns() == 15 * 24);
    CHECK(g.r(g.n_r - 1) == doctest::Approx(1.0).epsilon(1e-15));
    // the last ring is the boundary
    for (int j = 0; j < g.n_theta; ++j) {
        const Vec2 x = g.center + g.r(g.n_r - 1) * g.w[j];
        CHECK((x - square4().z(static_cast<double>(j) / g.n_theta)).norm() < 1e-14);
    }
    CHECK(g.index(2, 5) == 2 * 24 + 5);
}

TEST_CASE("assembly symmetries") {
    const FittedGrid g = fitted_grid(square4(), 16, 16);
    const auto P = operator_pieces(square4(), g);
    const cplx w(kLam, 0.2);
    CHECK_THROWS_AS(assemble(P, w, -1e-3), SolverError);
    // nu = 0: P depends on omega^2 only, and conj(P_omega) = P_{conj omega}
    CHECK(rel_diff(assemble(P, w, 0.0).A, assemble(P, -w, 0.0).A) < 1e-15);
    CHECK(rel_diff(SpMat(assemble(P, w, 0.0).A.conjugate()), assemble(P, std::conj(w), 0.0).A) < 1e-15);
    // viscous: conj(P_{omega,nu}) = P_{-conj omega,nu}
    CHECK(rel_diff(SpMat(assemble(P, w, 1e-3).A.conjugate()), assemble(P, -std::conj(w), 1e-3).A) < 1e-15);
    CHECK(assemble(P, w, 0.0).order == 2);
    CHECK(assemble(P, w, 1e-3).order == 4);
    // the inviscid stencil is second order only: the viscous block widens it
    CHECK(max_row_nnz(assemble(P, w, 0.0).A) <= 9);
    CHECK(max_row_nnz(assemble(P, w, 1e-3).A) > max_row_nnz(assemble(P, w, 0.0).A));
}

TEST_CASE("quadratic consistency of the flat operator") {
    const cplx w(kLam, 0.3);
    std::vector<double> e1, e2;
    for (int n : {32, 64}) {
        const FittedGrid g = fitted_grid(square4(), n, n);
        const DiscreteOperator op = assemble(square4(), g, w, 0.0);
        // P = -omega^2 d1^2 + (1 - omega^2) d2^2
        e1.push_back(interior_defect(op, sample(g, [](const Vec2& x) { return cplx(x(0) * x(0)); }), -2.0 * w * w));
        e2.push_back(interior_defect(op, sample(g, [](const Vec2& x) { return cplx(x(0) * x(1)); }), 0.0));
    }
    // pointwise O(h^2): the curvilinear metric terms keep the constant large on this boundary
    CHECK(e1[0] / e1[1] > 3.0);
    CHECK(e2[0] / e2[1] > 3.0);
}

TEST_CASE("solve is linear") {
    const FittedGrid g = fitted_grid(square4(), 24, 24);
    const DiscreteOperator op = assemble(square4(), g, cplx(kLam, 0.1), 1e-3);
    const CVec f = bump(g, 0.2);
    const Solution a = solve_pde(op, f), b = solve_pde(op, CVec(2.0 * f));
    CHECK((b.u - 2.0 * a.u).norm() / b.u.norm() < 1e-12);
    const Solution z = solve_pde(op, CVec::Zero(g.unknowns()));
    CHECK(z.u.norm() == 0.0);
    CHECK(a.backward_error < 1e-14);
    CHECK(a.residual < 1e-6);
}

TEST_CASE("Green identity is exact for the discrete operator") {
    const FittedGrid g = fitted_grid(square4(), 32, 32);
    const CVec u = sample(g, [&](const Vec2& x) {
        const double s = 1.0 - x.squaredNorm();
        return cplx(std::cos(3 * x(0)), std::sin(2 * x(1))) * s;
    });
    for (double nu : {0.0, 1e-3})
        for (cplx w : {cplx(kLam, 0.1), cplx(0.4, 0.7)}) {
            const DiscreteOperator op = assemble(square4(), g, w, nu);
            const GridNorms nr = grid_norms(op, u);
            const double scale = w.real() * (nu * nr.lap * nr.lap + 2 * w.imag() * nr.grad * nr.grad) /
                                 (nr.l2 * nr.l2);
            CHECK(green_residual(op, u) < 1e-10 * scale);
        }
}

TEST_CASE("manufactured solution converges at second order") {
    for (double nu : {0.0, 1e-3}) {
        CAPTURE(nu);
        const MmsResult r = mms_convergence(cplx(kLam, 0.5), nu, {32, 64, 128});
        REQUIRE(r.error.size() == 3);
        CHECK(r.error[1] < r.error[0]);
        CHECK(r.order >= 2.0 - 0.1);
    }
}

TEST_CASE("Green residual of a solve at 128^2") {
    const FittedGrid g = fitted_grid(disk(), 128, 128, Vec2::Zero());
    const DiscreteOperator op = assemble(disk(), g, cplx(kLam, 0.1), 1e-3);
    const Solution s = solve_pde(op, bump(g, 0.2));
    CHECK(s.green_residual < 1e-6);
    // the viscous block makes A ill conditioned; the relative residual sits near eps cond(A)
    CHECK(s.backward_error < 1e-14);
}

TEST_CASE("smallest singular value") {
    // diagonal matrix: exact answer
    const int n = 50;
    SpMat D(n, n);
    for (int k = 0; k < n; ++k) D.insert(k, k) = cplx(1.0 + k, 0.5 * k);
    const SigmaMin s = smallest_singular_value(D);
    CHECK(s.converged);
    CHECK(s.value == doctest::Approx(1.0).epsilon(1e-6));

    // dense check on a small operator
    const FittedGrid g = fitted_grid(disk(), 10, 10, Vec2::Zero());
    const DiscreteOperator op = assemble(disk(), g, cplx(kLam, 0.5), 1e-3);
    const Eigen::MatrixXcd A(op.A);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
    const SigmaMin t = smallest_singular_value(op.A, 1e-10, 500);
    CHECK(t.value == doctest::Approx(svd.singularValues().minCoeff()).epsilon(1e-6));
}

TEST_CASE("scaled sigma_min is stable under refinement off the real axis") {
    std::vector<double> s;
    for (int n : {32, 64}) {
        const auto P = operator_pieces(disk(), fitted_grid(disk(), n, n, Vec2::Zero()));
        const ScanCell c = scan_cell(P, cplx(kLam, 0.5), 0.0);
        CHECK(c.converged);
        CHECK(c.scaled > 0.0);
        s.push_back(c.scaled);
    }
    CHECK(std::abs(s[1] / s[0] - 1.0) < 0.3);
}

TEST_CASE("scan table bookkeeping") {
    ScanOptions opt;
    opt.re_lo = kLam - 0.02;
    opt.re_hi = kLam + 0.02;
    opt.im_lo = -0.02;
    opt.im_hi = 0.02;
    opt.re_n = 3;
    opt.im_n = 2;
    opt.nus = {1e-3, 1e-4};
    opt.n_r = opt.n_theta = 16;
    const auto box = omega_box(opt);
    REQUIRE(box.size() == 6);
    CHECK(box.front() == cplx(kLam - 0.02, -0.02));
    CHECK(box.back() == cplx(kLam + 0.02, 0.02));
    const ScanTable t = sigma_min_scan(square4(), opt);
    REQUIRE(t.cells.size() == 12);
    for (size_t k = 0; k < 2; ++k) {
        double m = 1e300;
        for (size_t j = 0; j < 6; ++j) {
            CHECK(t.cells[k * 6 + j].nu == opt.nus[k]);
            m = std::min(m, t.cells[k * 6 + j].scaled);
        }
        CHECK(t.floor_scaled[k] == m);
        CHECK(t.floor_scaled[k] > 0.0);
    }
}

TEST_CASE("deformed operator") {
    const auto& F = fx::figure1();
    const cplx w(kLam, 0.3);
    // tau = 0 reproduces the flat pieces
    {
        const FittedGrid g = fitted_grid(F.bil.domain(), 16, 16);
        const DiscreteOperator a = assemble(F.dm.with_tau(0.0), g, w, 1e-3);
        const DiscreteOperator b = assemble(F.bil.domain(), g, w, 1e-3);
        CHECK(rel_diff(a.A, b.A) < 1e-15);
    }
    // pushed-forward quadratic xi_1^2 is mapped to -2 omega^2 in the interior
    std::vector<double> e;
    for (int n : {32, 64}) {
        const FittedGrid g = fitted_grid(F.bil.domain(), n, n);
        const DiscreteOperator op = assemble(F.dm, g, w, 0.0);
        const CVec u = sample(g, [&](const Vec2& x) {
            const CVec2 xi = F.dm.xi(x);
            return xi(0) * xi(0);
        });
        e.push_back(interior_defect(op, u, -2.0 * w * w));
    }
    CHECK(e[0] / e[1] > 3.0);
    // a viscous solve goes through
    const FittedGrid g = fitted_grid(F.bil.domain(), 24, 24);
    const DiscreteOperator op = assemble(F.dm, g, w, 1e-3);
    const Solution s = solve_pde(op, bump(g, 0.2));
    CHECK(s.residual < 1e-8);
    CHECK(std::isnan(s.green_residual));
}

TEST_CASE("viscosity sweep on small grids") {
    const SweepResult r = viscosity_sweep(square4(), {1e-2, 1e-3}, 48);
    CHECK_FALSE(r.cycles.empty());
    REQUIRE(r.rows.size() == 2);
    for (const SweepRow& row : r.rows) {
        CHECK(row.ok);
        CHECK(row.norms.l2 > 0.0);
        CHECK(std::abs(row.correlation) <= 1.0);
    }
    // less viscosity, steeper field
    CHECK(r.rows[1].norms.h1() > r.rows[0].norms.h1());
    const SweepResult bad = viscosity_sweep(disk(), {0.0}, 16);
    CHECK_FALSE(bad.rows[0].ok);
    // the disk has no attracting cycle: the reference set is one orbit
    CHECK(bad.cycles.size() == 1);
}

TEST_CASE("gradient magnitude of a linear field") {
    // exact in r, second order in theta
    std::vector<double> e;
    for (int n : {64, 128}) {
        const FittedGrid g = fitted_grid(square4(), n, n);
        const DiscreteOperator op = assemble(square4(), g, cplx(kLam), 1e-3);
        const CVec u = sample(g, [](const Vec2& x) { return cplx(3 * x(0) - 4 * x(1)); });
        const Eigen::VectorXd gm = gradient_magnitude(op, u);
        double m = 0.0;
        for (int i = 1; i + 2 < g.n_r; ++i)
            for (int j = 0; j < g.n_theta; ++j) m = std::max(m, std::abs(gm(g.index(i, j)) - 5.0));
        e.push_back(m);
    }
    CHECK(e[1] < 0.02 * 5.0);
    CHECK(e[0] / e[1] > 3.0);
}
