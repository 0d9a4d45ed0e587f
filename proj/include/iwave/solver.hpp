#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "iwave/deformation.hpp"
#include "iwave/geometry.hpp"

namespace iw {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using SpMat = Eigen::SparseMatrix<cplx>;
using CVec = Eigen::VectorXcd;

// Boundary-fitted coordinates x = c + r (z(theta) - c). Rings r_i = (i + 1/2) h with
// h = 1 / (n_r - 1/2), so ring n_r - 1 is the boundary and ring n_r a ghost ring outside it.
// Angles theta_j = j / n_theta. Unknowns are the rings 0..n_r-2, index i * n_theta + j.
struct FittedGrid {
    int n_r = 0, n_theta = 0;
    double h = 0.0, dtheta = 0.0;
    Vec2 center = Vec2::Zero();
    std::vector<Vec2> w, dw;  // z - c and z' at the node angles
    std::vector<Vec2> wm, dwm;  // same at half angles theta_{j+1/2}

    double r(int i) const { return (i + 0.5) * h; }
    int unknowns() const { return (n_r - 1) * n_theta; }
    int index(int i, int j) const { return i * n_theta + j; }
    Vec2 point(int i, int j) const { return center + r(i) * w[j]; }
    // jacobian of (r, theta) -> x at r with boundary data (w, w')
    static Mat2 map_jacobian(double r, const Vec2& w, const Vec2& dw);
};

// Star check: w x w' > 0 along the boundary (every ray from c meets it once); n_r < 8 throws.
FittedGrid fitted_grid(const Domain& dom, int n_r, int n_theta, std::optional<Vec2> center = std::nullopt);

// Grid-only pieces of the operator: everything except the omega, nu combination.
struct OperatorPieces {
    FittedGrid grid;
    double tau = 0.0;
    Eigen::VectorXd W;     // sqrt(g) h dtheta on rings 0..n_r-1
    Eigen::VectorXd What;  // same with the boundary ring at half weight
    SpMat K1, K2;          // int d_k u d_k v on the unknowns (flat)
    SpMat Lap;             // Delta_h: unknowns -> rings 0..n_r-1, ghost ring eliminated (flat)
    SpMat Bih;             // Lap^T What Lap (flat)
    // tau > 0: pushed-forward blocks
    CVec Wc;               // W det D_x Xi on rings 0..n_r-1
    SpMat Ka11, Ka22;      // forms of the tensors det J J^-1 e_k e_k^T J^-T
    SpMat BihTau;          // Lap_tau^T What_c Lap_tau
};

std::shared_ptr<const OperatorPieces> operator_pieces(const Domain& dom, const FittedGrid& g);
std::shared_ptr<const OperatorPieces> operator_pieces(const DeformationMap& dm, const FittedGrid& g);

struct DiscreteOperator {
    std::shared_ptr<const OperatorPieces> pieces;
    cplx omega = 0.0;
    double nu = 0.0;
    int order = 2;  // 2 for nu = 0 (Dirichlet only), 4 with the viscous block (Dirichlet + Neumann)
    SpMat A;        // P_h on the unknowns
    const FittedGrid& grid() const { return pieces->grid; }
    double tau() const { return pieces->tau; }
    bool neumann() const { return nu > 0.0; }
};

DiscreteOperator assemble(std::shared_ptr<const OperatorPieces> pieces, cplx omega, double nu);
// Flat operator P_{omega,nu}.
DiscreteOperator assemble(const Domain& dom, const FittedGrid& g, cplx omega, double nu);
// Pushed-forward P^(tau) in divergence form (1/det J) div(det J J^{-1} a J^{-T} grad u).
DiscreteOperator assemble(const DeformationMap& dm, const FittedGrid& g, cplx omega, double nu);

struct GridNorms {
    double l2 = 0.0;     // ||u||_h
    double grad = 0.0;   // ||grad_h u||
    double lap = 0.0;    // ||Delta_h u|| (boundary ring at half weight)
    double h1() const { return std::sqrt(l2 * l2 + grad * grad); }
};
GridNorms grid_norms(const DiscreteOperator& op, const CVec& u);
// <a, b>_h = sum W a conj(b)
cplx inner(const DiscreteOperator& op, const CVec& a, const CVec& b);

// |Im<Pu,u> - Re omega (nu ||Delta u||^2 + 2 Im omega ||grad u||^2)| / ||u||^2
double green_residual(const DiscreteOperator& op, const CVec& u);

struct Solution {
    CVec u;
    double green_residual = 0.0;  // NaN for tau > 0
    double residual = 0.0;        // ||A u - f||_h / ||f||_h
    double backward_error = 0.0;  // ||A u - f||_inf / (||A||_inf ||u||_inf + ||f||_inf)
};

// Sparse LU solve with refinement; SolverError carrying a sigma_min estimate when the factorization
// fails or the backward error exceeds 1e-10.
Solution solve_pde(const DiscreteOperator& op, const CVec& f);

// f sampled at the unknown nodes
template <class F>
CVec sample(const FittedGrid& g, F&& f) {
    CVec v(g.unknowns());
    for (int i = 0; i + 1 < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) v(g.index(i, j)) = f(g.point(i, j));
    return v;
}

// Manufactured solution on the unit disk: u* = (1 - |x|^2)^2 and P u* in closed form.
cplx mms_exact(const Vec2& x);
cplx mms_forcing(cplx omega, double nu, const Vec2& x);

struct MmsResult {
    std::vector<int> n;
    std::vector<double> error;  // relative discrete L2 error
    double order = 0.0;         // log2 of the last error ratio
};
MmsResult mms_convergence(cplx omega, double nu, const std::vector<int>& sizes);

struct SigmaMin {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};
// Smallest singular value of the matrix M by block inverse iteration on M^H M (LU of M),
// relative tolerance `tol`, at most `max_iter` sweeps.
SigmaMin smallest_singular_value(const SpMat& M, double tol = 1e-6, int max_iter = 200, int block = 4);

// raw: sigma_min of A. scaled: sigma_min of W^{1/2} A W^{-1/2}, the operator norm on L^2_h.
struct ScanCell {
    cplx omega = 0.0;
    double nu = 0.0;
    double raw = 0.0, scaled = 0.0;
    bool converged = false;
};

struct ScanOptions {
    double re_lo = 0.0, re_hi = 0.0, im_lo = 0.0, im_hi = 0.0;
    int re_n = 9, im_n = 9;
    std::vector<double> nus;
    int n_r = 96, n_theta = 96;
};

std::vector<cplx> omega_box(const ScanOptions& opt);
ScanCell scan_cell(const std::shared_ptr<const OperatorPieces>& pieces, cplx omega, double nu);

struct ScanTable {
    std::vector<ScanCell> cells;  // nu-major, then omega_box order
    std::vector<double> nus;
    std::vector<double> floor_raw, floor_scaled;  // per nu, min over the box
    int unconverged = 0;
};
ScanTable sigma_min_scan(const std::shared_ptr<const OperatorPieces>& pieces, const ScanOptions& opt);
ScanTable sigma_min_scan(const Domain& dom, const ScanOptions& opt);

struct SweepRow {
    double nu = 0.0;
    GridNorms norms;
    double correlation = 0.0;  // |grad u| vs. proximity to the attractor cycle
    bool ok = true;
    std::string error;
    CVec u;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<std::vector<Vec2>> cycles;  // attracting cycles as closed polygons
};

// Gaussian bump of width `sigma` at the grid center
CVec bump(const FittedGrid& g, double sigma);

// Attracting periodic orbits of b as chord polygons (empty when there are none).
std::vector<std::vector<Vec2>> attractor_cycles(const Domain& dom);
// Pearson correlation of |grad u| with exp(-d^2 / (2 s^2)), d the distance to the cycles.
double attractor_correlation(const DiscreteOperator& op, const CVec& u, const std::vector<std::vector<Vec2>>& cycles,
                             double s = 0.05);
// For a domain without an attracting cycle (the disk) the reference set is the orbit of theta = 0.
SweepResult viscosity_sweep(const Domain& dom, const std::vector<double>& nus, int n, double bump_sigma = 0.15);

// |grad_h u| at the interior nodes
Eigen::VectorXd gradient_magnitude(const DiscreteOperator& op, const CVec& u);

}  // namespace iw
