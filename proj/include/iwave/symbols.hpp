#pragma once

#include <array>
#include <string>
#include <vector>

#include "iwave/deformation.hpp"
#include "iwave/geometry.hpp"

namespace iw {

// Symbols use the convention a(xi) = i^m sum a_pq xi1^p xi2^q for an order-m operator.
struct FlatSymbols {
    cplx p;   // omega^2 xi1^2 - (1 - omega^2) xi2^2
    cplx q;   // |xi|^4
    cplx A;   // p + i omega nu q
    cplx A6;  // p + 2 i omega nu |xi|^4 - nu^2 |xi|^6
};

FlatSymbols flat_symbols(cplx omega, double nu, const CVec2& xi);
// -4 xi(L^+_omega) xi(L^-_omega); needs Re(1 - omega^2) > 0
cplx p_factored(cplx omega, const CVec2& xi);

enum class SymbolKind { P, Q, A, A6 };

// a(J^{-T} xi); throws DeformationError for singular J
cplx deformed_symbol(const CMat2& J, SymbolKind kind, cplx omega, double nu, const Vec2& xi);
// p(J^{-T} xi) at real omega = lambda through the characteristic-basis expansion of J^{-1}
cplx deformed_p_cramer(const CMat2& J, double lambda, const Vec2& xi);
CVec2 pushforward_covector(const CMat2& J, const CVec2& xi);

struct EllipticityOptions {
    double lambda = 0.7071067811865476;
    double re_half = 0.01;  // Re omega in lambda + [-re_half, re_half]
    double im_lo = 0.0, im_hi = 1.0;
    int re_n = 3, im_n = 4;
    int directions = 64;
    int grid_n = 32;       // interior grid
    int boundary_n = 128;  // boundary samples
    double c0_max = 1e6;
};

struct EllipticityCertificate {
    double tau = 0.0;
    int points = 0, directions = 0, omegas = 0, t_samples = 0;

    // Im p + C0 tau |Re p| >= C0^{-1} (tau + Im omega) |xi|^2
    double C0 = 0.0;
    double inviscid_slack = 0.0;  // min slack at C0
    // Im omega -> inf: slack / (Im omega)^2 -> Im c + C0 tau |Re c|, c the omega^2 coefficient of -p.
    // Folded into the C0 fit so the frozen C0 also covers the untruncated half-line.
    double asymptotic_slack = 0.0;
    bool inviscid_pass = false;
    Vec2 worst_x = Vec2::Zero();
    Vec2 worst_xi = Vec2::Zero();
    cplx worst_omega = 0.0;

    // |p + i lambda t q| >= C^{-1} (1 + t) on unit xi, t = nu |xi|^2 in [0, inf)
    double singular_cinv = 0.0;
    double singular_worst_t = 0.0;
    bool singular_pass = false;

    bool pass() const { return inviscid_pass && singular_pass; }
};

// Inviscid slack Im p + C0 tau |Re p| - (tau + Im omega)|xi|^2 / C0 at one sample.
double inviscid_slack(const CMat2& J, cplx omega, const Vec2& xi, double tau, double C0);
// |A_tau(nu, x, xi)| / (|xi|^2 <sqrt(nu) xi>^2) at omega = lambda
double singular_ratio(const CMat2& J, double lambda, double nu, const Vec2& xi);

EllipticityCertificate certify_ellipticity(const DeformationMap& dm, const EllipticityOptions& opt = {});

struct RootCount {
    int upper = 0, lower = 0;
    bool indeterminate = false;
    double min_abs_im = 0.0;
    std::vector<cplx> roots;
};

// Roots of sum c[k] z^k by companion-matrix eigenvalues.
std::vector<cplx> polynomial_roots(const std::vector<cplx>& coef);
RootCount count_roots(const std::vector<cplx>& coef, double real_tol = 1e-8);

struct CoercivityReport {
    double theta = 0.0;
    std::array<RootCount, 4> counts;  // (i) q, (ii) A(0), (iii) A(nu), (iv) z^{-2} A(1, z n)
    static constexpr std::array<std::array<int, 2>, 4> expected = {{{2, 2}, {1, 1}, {2, 2}, {1, 1}}};
    bool pass() const;
};

// Polynomials in z of xi_t + z n pushed forward by J = D_x Xi at z(theta); n the outward conormal.
CoercivityReport coercivity_roots(const DeformationMap& dm, double theta, const Vec2& xi_t, double nu);
CoercivityReport coercivity_roots(const CMat2& J, double lambda, const Vec2& xi_t, const Vec2& n, double nu);

// <xi>^{2r} <sqrt(nu) xi>^{2s}
double param_weight(double r, double s, double nu, const Vec2& xi);
// sqrt( sum weight(xi_k) |u_k|^2 * cell ) over a sampled spectrum
double param_norm(double r, double s, double nu, const std::vector<Vec2>& xi, const std::vector<double>& mag,
                  double cell_area);

}  // namespace iw
