#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "iwave/deformation.hpp"
#include "iwave/geometry.hpp"

namespace iw {

struct SingularPointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// i / (4 pi lambda sqrt(1 - lambda^2))
cplx fundamental_constant(double lambda);
// log(a + i0) for real a != 0
cplx log_plus_i0(double a);
// holomorphic log on C \ iR_-, arg in [-pi/2, 3pi/2); throws on the cut
cplx log_branch(cplx z);
double branch_angle(cplx z);

// A_lambda(x) = l^+(x) l^-(x)
double char_product(double lambda, const Vec2& x);
cplx char_product(double lambda, const CVec2& x);

// E_{lambda+i0}(x) = c log(A(x) + i0); SingularPointError on characteristic lines
cplx fundamental_flat(double lambda, const Vec2& x);

struct KernelSample {
    Vec2 x = Vec2::Zero(), y = Vec2::Zero();
    cplx value = 0.0;
    double branch_angle = 0.0;
};

// c log(A(Xi x - Xi y)) det D_x Xi(y)
KernelSample fundamental_deformed(const DeformationMap& dm, const Vec2& x, const Vec2& y);
KernelSample fundamental_deformed(double lambda, const Vec2& x, const Vec2& y, const XiValue& vx, const XiValue& vy);

struct BranchStats {
    int samples = 0;
    double min_angle = 0.0, max_angle = 0.0;
    double alpha0 = 0.0;  // smallest alpha with all angles in [-alpha, pi + alpha)
    bool pass() const { return alpha0 < kPi / 2; }
};

// Random pairs of interior points (grid_n x grid_n grid), deterministic in `seed`.
BranchStats branch_statistics(const DeformationMap& dm, int pairs = 10000, int grid_n = 48, unsigned seed = 7);

// A(Xi x - Xi y) = (1 + tau w)(A(x - y) + i tau g) with the mean-value Jacobian over [y, x].
struct FactorizationFit {
    int samples = 0;
    double min_re = 0.0, max_re = 0.0;  // Re g / |x - y|^2
    double max_im = 0.0;                // |Im g| / (tau |x - y|^2)
    double C = 0.0;
    double inequality_slack = 0.0;      // min of Im A + C^2 tau |Re A| - tau |x-y|^2 / (2C), scaled by |x-y|^2
};
FactorizationFit factorization_fit(const DeformationMap& dm, int pairs = 10000, int grid_n = 48, unsigned seed = 11);

// Characteristic-aligned grid: node (i, j) sits at s^+ = sp0 + i h, s^- = sm0 + j h, i.e.
// x = s^+ L^+ + s^- L^-; cell area (lambda mu / 2) h^2. Flattened index i * n + j.
struct CharGrid {
    double lambda = 0.7071067811865476;
    double sp0 = 0.0, sm0 = 0.0, h = 0.0;
    int n = 0;
    Vec2 point(int i, int j) const;
    double cell_area() const;
};
// n x n grid covering the disc of radius `radius` about `center`
CharGrid char_grid(double lambda, const Vec2& center, double radius, int n);

// E_{lambda+i0} * f on the grid: product integration for the log|s^+-| parts, separable signed
// cumulative sums for the i pi/2 (1 - sgn sgn) part. Throws if f does not vanish on the grid edge.
std::vector<cplx> apply_E_flat(const CharGrid& g, const std::vector<cplx>& f, double edge_tol = 1e-10);

// E^(tau) * f over interior nodes of spacing h (cells of area h^2); self cell by polar-patch integration.
std::vector<cplx> apply_E_deformed(const DeformationMap& dm, const std::vector<Vec2>& nodes, double h,
                                   const std::vector<cplx>& f);

// Kress quadrature weight for the log(4 sin^2 pi t) kernel at offset t with n nodes.
double kress_weight(double t, int n);

struct NystromSystem {
    int n = 0;
    double tau = 0.0, lambda = 0.0;
    std::vector<double> theta;
    std::vector<CVec2> xi;   // Xi(z(theta_j))
    std::vector<CVec2> dxi;  // d/dtheta Xi(z(theta_j))
    std::vector<cplx> det;   // det D_x Xi(z(theta_j))
    std::vector<double> kress;  // kress_weight(k / n, n)
    Eigen::MatrixXcd C;      // (C v)_i = sum_j C_ij v_j for densities v(theta) dtheta
};

NystromSystem layer_ops(const DeformationMap& dm, int n);
// C kernel entries row i (for the parallel/serial assembly pair)
void nystrom_row(const NystromSystem& sys, int i, cplx* row);

// boundary trace (C v)(theta) at an arbitrary parameter
cplx trace_at(const NystromSystem& sys, const DeformationMap& dm, const Eigen::VectorXcd& v, double theta);
// S v at an interior point by the trapezoidal rule
cplx single_layer_eval(const NystromSystem& sys, const Eigen::VectorXcd& v, const DeformationMap& dm, const Vec2& x);
// <phi, C psi> with trapezoidal weights
cplx pairing(const NystromSystem& sys, const Eigen::VectorXcd& phi, const Eigen::VectorXcd& psi);

// K_sign(theta, theta') = c l(dXi(theta)) / l(Xi(theta) - Xi(theta')) det(theta')
cplx kernel_K(const DeformationMap& dm, Sign s, double theta, double theta_p);
// principal-value T_sign v at theta by the alternating-point trapezoidal rule (theta midway between nodes)
cplx apply_T(const NystromSystem& sys, const DeformationMap& dm, Sign s, const Eigen::VectorXcd& v, double theta);

struct DensitySolve {
    Eigen::VectorXcd v;
    double residual = 0.0;   // ||C v - phi|| / max(||phi||, tiny)
    double condition = 0.0;  // sigma_max / sigma_min of C
    bool warning = false;    // residual above threshold
};
DensitySolve solve_boundary_density(const NystromSystem& sys, const Eigen::VectorXcd& phi, double alpha_rel = 1e-14,
                                    double warn_residual = 1e-6);
double condition_number(const NystromSystem& sys);

}  // namespace iw
