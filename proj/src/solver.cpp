#include "iwave/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "iwave/billiard.hpp"
#include "iwave/kernels.hpp"
#include "iwave/sparse_lu.hpp"

namespace iw {

namespace {

const cplx I(0.0, 1.0);

using Trip = Eigen::Triplet<cplx>;
using CMatX = Eigen::MatrixXcd;

double cross(const Vec2& a, const Vec2& b) { return a(0) * b(1) - a(1) * b(0); }

// Quadratic form sum over faces/cells of B_ab D_a u D_b v on rings 0..rings-1 (all nodes), keeping
// rows < row_lim and columns < col_lim. tensor(r, w, dw) returns B in (r, theta) coordinates,
// including sqrt(g) (and det J for the pushed-forward case).
template <class TensorFn>
SpMat build_form(const FittedGrid& g, int rings, int row_lim, int col_lim, TensorFn&& tensor) {
    const int nt = g.n_theta;
    const double h = g.h, dt = g.dtheta;
    std::vector<Trip> trips;
    trips.reserve(static_cast<size_t>(rings) * nt * 24);
    auto node = [&](int i, int j) { return i * nt + ((j % nt) + nt) % nt; };
    auto add = [&](const int* n, const cplx* a, const cplx* b, int k, cplx coef) {
        // coef * (sum a u)(sum b v) symmetrized by the caller
        for (int p = 0; p < k; ++p) {
            if (n[p] >= row_lim) continue;
            for (int q = 0; q < k; ++q) {
                if (n[q] >= col_lim) continue;
                const cplx v = coef * b[p] * a[q];
                if (v != 0.0) trips.emplace_back(n[p], n[q], v);
            }
        }
    };
    for (int i = 0; i < rings; ++i) {
        for (int j = 0; j < nt; ++j) {
            // r-face between rings i and i+1 at theta_j
            if (i + 1 < rings) {
                const auto B = tensor((i + 1) * h, g.w[j], g.dw[j]);
                const int n[2] = {node(i, j), node(i + 1, j)};
                const cplx d[2] = {-1.0 / h, 1.0 / h};
                add(n, d, d, 2, B(0, 0) * h * dt);
            }
            // theta-face on ring i between theta_j and theta_{j+1}
            {
                const auto B = tensor(g.r(i), g.wm[j], g.dwm[j]);
                const int n[2] = {node(i, j), node(i, j + 1)};
                const cplx d[2] = {-1.0 / dt, 1.0 / dt};
                add(n, d, d, 2, B(1, 1) * h * dt);
            }
            // cross term on the cell (i+1/2, j+1/2)
            if (i + 1 < rings) {
                const auto B = tensor((i + 1) * h, g.wm[j], g.dwm[j]);
                const int n[4] = {node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)};
                const cplx dr[4] = {-0.5 / h, 0.5 / h, -0.5 / h, 0.5 / h};
                const cplx dq[4] = {-0.5 / dt, -0.5 / dt, 0.5 / dt, 0.5 / dt};
                const cplx c = B(0, 1) * h * dt;
                add(n, dr, dq, 4, c);
                add(n, dq, dr, 4, c);
            }
        }
    }
    SpMat K(row_lim, col_lim);
    K.setFromTriplets(trips.begin(), trips.end());
    K.prune(cplx(0.0));
    return K;
}

// Cartesian tensor T -> detM * M^-1 T M^-T
template <class Mat>
Mat to_grid(const Mat2& M, const Mat& T) {
    const Mat2 G = M.inverse();
    return M.determinant() * (G.cast<typename Mat::Scalar>() * T * G.transpose().cast<typename Mat::Scalar>());
}

// extension unknowns -> rings 0..n_r: boundary ring zero, ghost ring mirrored from ring n_r-2
SpMat extension(const FittedGrid& g) {
    const int nt = g.n_theta, nu = g.unknowns();
    std::vector<Trip> t;
    for (int k = 0; k < nu; ++k) t.emplace_back(k, k, 1.0);
    for (int j = 0; j < nt; ++j) t.emplace_back(g.n_r * nt + j, (g.n_r - 2) * nt + j, 1.0);
    SpMat E((g.n_r + 1) * nt, nu);
    E.setFromTriplets(t.begin(), t.end());
    return E;
}

SpMat diag(const CVec& d) {
    SpMat D(d.size(), d.size());
    D.reserve(Eigen::VectorXi::Constant(d.size(), 1));
    for (int k = 0; k < d.size(); ++k) D.insert(k, k) = d(k);
    return D;
}

Eigen::VectorXd ring_weights(const FittedGrid& g) {
    const int nt = g.n_theta;
    Eigen::VectorXd W(g.n_r * nt);
    for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < nt; ++j) W(i * nt + j) = g.r(i) * cross(g.w[j], g.dw[j]) * g.h * g.dtheta;
    return W;
}

void flat_blocks(OperatorPieces& P) {
    const FittedGrid& g = P.grid;
    const int nu = g.unknowns(), nt = g.n_theta;
    auto tensor_k = [&](int k) {
        return [&g, k](double r, const Vec2& w, const Vec2& dw) {
            Mat2 T = Mat2::Zero();
            T(k, k) = 1.0;
            return to_grid<Mat2>(FittedGrid::map_jacobian(r, w, dw), T);
        };
    };
    P.K1 = build_form(g, g.n_r, nu, nu, tensor_k(0));
    P.K2 = build_form(g, g.n_r, nu, nu, tensor_k(1));
    P.W = ring_weights(g);
    P.What = P.W;
    for (int j = 0; j < nt; ++j) P.What((g.n_r - 1) * nt + j) *= 0.5;
    auto lap_tensor = [](double r, const Vec2& w, const Vec2& dw) {
        return to_grid<Mat2>(FittedGrid::map_jacobian(r, w, dw), Mat2::Identity());
    };
    const SpMat KI = build_form(g, g.n_r + 1, g.n_r * nt, (g.n_r + 1) * nt, lap_tensor);
    const CVec winv = P.W.cwiseInverse().cast<cplx>();
    P.Lap = -(diag(winv) * (KI * extension(g)));
    P.Bih = SpMat(P.Lap.transpose()) * diag(P.What.cast<cplx>()) * P.Lap;
}

}  // namespace

Mat2 FittedGrid::map_jacobian(double r, const Vec2& w, const Vec2& dw) {
    Mat2 M;
    M.col(0) = w;
    M.col(1) = r * dw;
    return M;
}

FittedGrid fitted_grid(const Domain& dom, int n_r, int n_theta, std::optional<Vec2> center) {
    if (n_r < 8 || n_theta < 8) throw SolverError("fitted_grid: grid too coarse for the fourth-order stencils (n < 8)");
    FittedGrid g;
    g.n_r = n_r;
    g.n_theta = n_theta;
    g.h = 1.0 / (n_r - 0.5);
    g.dtheta = 1.0 / n_theta;
    g.center = center ? *center : dom.centroid();
    const int check = std::max(4096, 8 * n_theta);
    for (int k = 0; k < check; ++k) {
        const double t = static_cast<double>(k) / check;
        if (cross(dom.z(t) - g.center, dom.z(t, 1)) <= 0.0)
            throw SolverError("fitted_grid: domain is not star-shaped about the chosen center");
    }
    for (int j = 0; j < n_theta; ++j) {
        const double t = static_cast<double>(j) / n_theta, tm = (j + 0.5) / n_theta;
        g.w.push_back(dom.z(t) - g.center);
        g.dw.push_back(dom.z(t, 1));
        g.wm.push_back(dom.z(tm) - g.center);
        g.dwm.push_back(dom.z(tm, 1));
    }
    return g;
}

std::shared_ptr<const OperatorPieces> operator_pieces(const Domain& /*dom*/, const FittedGrid& g) {
    auto P = std::make_shared<OperatorPieces>();
    P->grid = g;
    flat_blocks(*P);
    return P;
}

std::shared_ptr<const OperatorPieces> operator_pieces(const DeformationMap& dm, const FittedGrid& g) {
    auto P = std::make_shared<OperatorPieces>();
    P->grid = g;
    P->tau = dm.tau();
    flat_blocks(*P);
    if (dm.tau() == 0.0) return P;
    const int nu = g.unknowns(), nt = g.n_theta;
    // Xi is only defined on the closed domain: the ghost-side faces reuse the boundary Jacobian
    auto jac = [&](double r, const Vec2& w) { return dm.eval(g.center + std::min(r, 1.0) * w).J; };
    auto tensor_of = [&](const CMat2& T0) {
        return [&, T0](double r, const Vec2& w, const Vec2& dw) {
            const CMat2 J = jac(r, w);
            const CMat2 Ji = J.inverse();
            const CMat2 T = J.determinant() * (Ji * T0 * Ji.transpose());
            return to_grid<CMat2>(FittedGrid::map_jacobian(r, w, dw), T);
        };
    };
    CMat2 E11 = CMat2::Zero(), E22 = CMat2::Zero();
    E11(0, 0) = 1.0;
    E22(1, 1) = 1.0;
    P->Ka11 = build_form(g, g.n_r, nu, nu, tensor_of(E11));
    P->Ka22 = build_form(g, g.n_r, nu, nu, tensor_of(E22));
    P->Wc = CVec(g.n_r * nt);
    for (int i = 0; i < g.n_r; ++i)
        for (int j = 0; j < nt; ++j)
            P->Wc(i * nt + j) = P->W(i * nt + j) * jac(g.r(i), g.w[j]).determinant();
    const SpMat KI = build_form(g, g.n_r + 1, g.n_r * nt, (g.n_r + 1) * nt, tensor_of(CMat2::Identity()));
    const SpMat LapTau = -(diag(P->Wc.cwiseInverse()) * (KI * extension(g)));
    CVec whc = P->Wc;
    for (int j = 0; j < nt; ++j) whc((g.n_r - 1) * nt + j) *= 0.5;
    P->BihTau = SpMat(LapTau.transpose()) * diag(whc) * LapTau;
    return P;
}

DiscreteOperator assemble(std::shared_ptr<const OperatorPieces> pieces, cplx omega, double nu) {
    if (nu < 0.0) throw SolverError("assemble: nu must be nonnegative");
    DiscreteOperator op;
    op.pieces = pieces;
    op.omega = omega;
    op.nu = nu;
    op.order = nu > 0.0 ? 4 : 2;
    const OperatorPieces& P = *pieces;
    const int n = P.grid.unknowns();
    const cplx w2 = omega * omega;
    if (P.tau == 0.0) {
        const CVec winv = P.W.head(n).cwiseInverse().cast<cplx>();
        SpMat S = w2 * P.K1 - (1.0 - w2) * P.K2;
        if (nu > 0.0) S += (I * omega * nu) * P.Bih;
        op.A = diag(winv) * S;
    } else {
        const CVec winv = P.Wc.head(n).cwiseInverse();
        SpMat S = w2 * P.Ka11 - (1.0 - w2) * P.Ka22;
        if (nu > 0.0) S += (I * omega * nu) * P.BihTau;
        op.A = diag(winv) * S;
    }
    op.A.makeCompressed();
    return op;
}

DiscreteOperator assemble(const Domain& dom, const FittedGrid& g, cplx omega, double nu) {
    return assemble(operator_pieces(dom, g), omega, nu);
}

DiscreteOperator assemble(const DeformationMap& dm, const FittedGrid& g, cplx omega, double nu) {
    return assemble(operator_pieces(dm, g), omega, nu);
}

cplx inner(const DiscreteOperator& op, const CVec& a, const CVec& b) {
    const int n = op.grid().unknowns();
    return (a.array() * b.conjugate().array() * op.pieces->W.head(n).array()).sum();
}

GridNorms grid_norms(const DiscreteOperator& op, const CVec& u) {
    const OperatorPieces& P = *op.pieces;
    GridNorms nr;
    nr.l2 = std::sqrt(std::max(0.0, inner(op, u, u).real()));
    const cplx g2 = u.dot(P.K1 * u) + u.dot(P.K2 * u);
    nr.grad = std::sqrt(std::max(0.0, g2.real()));
    const CVec lu = P.Lap * u;
    nr.lap = std::sqrt((lu.cwiseAbs2().array() * P.What.array()).sum());
    return nr;
}

double green_residual(const DiscreteOperator& op, const CVec& u) {
    const GridNorms nr = grid_norms(op, u);
    const CVec Pu = op.A * u;
    const double lhs = inner(op, Pu, u).imag();
    const double rhs = op.omega.real() * (op.nu * nr.lap * nr.lap + 2.0 * op.omega.imag() * nr.grad * nr.grad);
    return std::abs(lhs - rhs) / (nr.l2 * nr.l2);
}

Solution solve_pde(const DiscreteOperator& op, const CVec& f) {
    // factor the symmetric-form matrix W A; the W^{-1} row scaling spans h^2..h and costs digits
    const int n = op.grid().unknowns();
    const CVec w = op.tau() == 0.0 ? CVec(op.pieces->W.head(n).cast<cplx>()) : CVec(op.pieces->Wc.head(n));
    const SpMat M = diag(w) * op.A;
    SparseLU lu(M);
    if (!lu.ok())
        throw SolverError("solve_pde: factorization failed (sigma_min estimate 0): " + lu.message());
    Solution s;
    if (f.cwiseAbs().maxCoeff() == 0.0) {
        s.u = CVec::Zero(n);
        s.green_residual = std::nan("");
        return s;
    }
    // residuals in the L^2_h norm: the pole rows carry tiny cells and huge stencil weights
    const Eigen::VectorXd sw = op.pieces->W.head(n).cwiseSqrt();
    auto hnorm = [&](const CVec& v) { return v.cwiseProduct(sw.cast<cplx>()).norm(); };
    const double fn = hnorm(f);
    auto rel = [&](const CVec& r) { return fn > 0.0 ? hnorm(r) / fn : hnorm(r); };
    s.u = lu.solve(CVec(w.cwiseProduct(f)));
    CVec r = f - op.A * s.u;
    s.residual = rel(r);
    for (int it = 0; it < 3 && s.residual > 1e-13; ++it) {
        const CVec u2 = s.u + lu.solve(CVec(w.cwiseProduct(r)));
        const CVec r2 = f - op.A * u2;
        const double res2 = rel(r2);
        if (!(res2 < s.residual)) break;
        s.u = u2;
        r = r2;
        s.residual = res2;
    }
    // normwise backward error; the pole rows make A badly scaled, so the plain residual is not a
    // singularity indicator
    double anorm = 0.0;
    {
        Eigen::VectorXd rs = Eigen::VectorXd::Zero(n);
        for (int c = 0; c < op.A.outerSize(); ++c)
            for (SpMat::InnerIterator it(op.A, c); it; ++it) rs(it.row()) += std::abs(it.value());
        anorm = rs.maxCoeff();
    }
    s.backward_error = r.cwiseAbs().maxCoeff() / (anorm * s.u.cwiseAbs().maxCoeff() + f.cwiseAbs().maxCoeff());
    if (!(s.backward_error < 1e-10)) {
        const SigmaMin sm = smallest_singular_value(op.A, 1e-3, 50);
        throw SolverError("solve_pde: near-singular operator, backward error " + std::to_string(s.backward_error) +
                          ", sigma_min estimate " + std::to_string(sm.value));
    }
    s.green_residual = op.tau() == 0.0 && fn > 0.0 ? green_residual(op, s.u) : std::nan("");
    return s;
}

cplx mms_exact(const Vec2& x) {
    const double s = 1.0 - x.squaredNorm();
    return s * s;
}

cplx mms_forcing(cplx omega, double nu, const Vec2& x) {
    const double s = 1.0 - x.squaredNorm();
    const cplx w2 = omega * omega;
    const double u11 = -4.0 * s + 8.0 * x(0) * x(0);
    const double u22 = -4.0 * s + 8.0 * x(1) * x(1);
    return -w2 * u11 + (1.0 - w2) * u22 + I * omega * nu * 64.0;
}

MmsResult mms_convergence(cplx omega, double nu, const std::vector<int>& sizes) {
    const Domain disk(preset_circle(0.7071067811865476));
    MmsResult res;
    for (int n : sizes) {
        const FittedGrid g = fitted_grid(disk, n, n, Vec2::Zero());
        const DiscreteOperator op = assemble(disk, g, omega, nu);
        const CVec f = sample(g, [&](const Vec2& x) { return mms_forcing(omega, nu, x); });
        const CVec ex = sample(g, mms_exact);
        const Solution s = solve_pde(op, f);
        const CVec e = s.u - ex;
        res.n.push_back(n);
        res.error.push_back(std::sqrt(inner(op, e, e).real() / inner(op, ex, ex).real()));
    }
    if (res.error.size() >= 2) {
        const size_t k = res.error.size() - 1;
        res.order = std::log(res.error[k - 1] / res.error[k]) /
                    std::log(static_cast<double>(res.n[k]) / res.n[k - 1]);
    }
    return res;
}

namespace {

// sigma_min of T = diag(L) M diag(R) from one factorization of M, by block inverse iteration on
// T^H T with Rayleigh-Ritz on the block.
SigmaMin sigma_min_scaled(const SpMat& M, const SparseLU& lu, const CVec& L, const CVec& R, double tol, int max_iter,
                          int block) {
    SigmaMin out;
    if (!lu.ok()) {
        out.converged = true;  // exactly singular to working precision
        return out;
    }
    const int n = static_cast<int>(M.cols());
    block = std::max(1, std::min(block, n));
    const CVec Li = L.cwiseInverse(), Ri = R.cwiseInverse();
    const CVec Lic = Li.conjugate(), Ric = Ri.conjugate();
    CMatX X(n, block);
    for (int k = 0; k < n; ++k)
        for (int b = 0; b < block; ++b) {
            const double a = 0.6180339887498949 * (k + 1) * (b + 1) + 0.37 * b;
            X(k, b) = cplx(std::cos(2.0 * kPi * a), std::sin(2.0 * kPi * 1.4142135623730951 * a));
        }
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iter; ++it) {
        // (T^H T)^{-1} X = R^-1 M^-1 L^-1 conj(L^-1) M^-H conj(R^-1) X
        CMatX Y = Ric.asDiagonal() * X;
        Y = lu.solve_adjoint(Y);
        Y = (Lic.cwiseProduct(Li)).asDiagonal() * Y;
        Y = Ri.asDiagonal() * lu.solve(Y);
        Eigen::HouseholderQR<CMatX> qr(Y);
        const CMatX Q = qr.householderQ() * CMatX::Identity(n, block);
        const CMatX Z = L.asDiagonal() * (M * (R.asDiagonal() * Q));
        const CMatX H = Z.adjoint() * Z;
        Eigen::SelfAdjointEigenSolver<CMatX> es(H);
        const double s = std::sqrt(std::max(0.0, es.eigenvalues()(0)));
        X = Q * es.eigenvectors();
        out.value = s;
        out.iterations = it;
        if (std::abs(s - prev) <= tol * s) {
            out.converged = true;
            break;
        }
        prev = s;
    }
    return out;
}

}  // namespace

SigmaMin smallest_singular_value(const SpMat& M, double tol, int max_iter, int block) {
    SparseLU lu(M);
    lu.set_refinement(0);
    const CVec one = CVec::Ones(M.cols());
    return sigma_min_scaled(M, lu, one, one, tol, max_iter, block);
}

std::vector<cplx> omega_box(const ScanOptions& opt) {
    std::vector<cplx> out;
    for (int a = 0; a < opt.re_n; ++a)
        for (int b = 0; b < opt.im_n; ++b) {
            const double re = opt.re_n == 1 ? opt.re_lo : opt.re_lo + (opt.re_hi - opt.re_lo) * a / (opt.re_n - 1);
            const double im = opt.im_n == 1 ? opt.im_lo : opt.im_lo + (opt.im_hi - opt.im_lo) * b / (opt.im_n - 1);
            out.emplace_back(re, im);
        }
    return out;
}

ScanCell scan_cell(const std::shared_ptr<const OperatorPieces>& pieces, cplx omega, double nu) {
    const DiscreteOperator op = assemble(pieces, omega, nu);
    const int n = op.grid().unknowns();
    // A = diag(w)^-1 M with M the symmetric-form matrix; one factorization of M serves both variants
    const CVec w = op.tau() == 0.0 ? CVec(pieces->W.head(n).cast<cplx>()) : CVec(pieces->Wc.head(n));
    const SpMat M = diag(w) * op.A;
    SparseLU lu(M);
    lu.set_refinement(0);
    const CVec sw = pieces->W.head(n).cwiseSqrt().cast<cplx>();
    ScanCell c;
    c.omega = omega;
    c.nu = nu;
    const SigmaMin raw = sigma_min_scaled(M, lu, w.cwiseInverse(), CVec::Ones(n), 1e-6, 200, 4);
    const SigmaMin sc = sigma_min_scaled(M, lu, sw.cwiseQuotient(w), sw.cwiseInverse(), 1e-6, 200, 4);
    c.raw = raw.value;
    c.scaled = sc.value;
    c.converged = raw.converged && sc.converged;
    return c;
}

ScanTable sigma_min_scan(const std::shared_ptr<const OperatorPieces>& pieces, const ScanOptions& opt) {
    ScanTable t;
    t.nus = opt.nus;
    const auto box = omega_box(opt);
    std::vector<std::pair<cplx, double>> jobs;
    for (double nu : opt.nus)
        for (cplx w : box) jobs.emplace_back(w, nu);
    t.cells = parallel_sigma_cells(pieces, jobs);
    for (size_t k = 0; k < opt.nus.size(); ++k) {
        double fr = std::numeric_limits<double>::infinity(), fs = fr;
        for (size_t m = 0; m < box.size(); ++m) {
            const ScanCell& c = t.cells[k * box.size() + m];
            fr = std::min(fr, c.raw);
            fs = std::min(fs, c.scaled);
            if (!c.converged) ++t.unconverged;
        }
        t.floor_raw.push_back(fr);
        t.floor_scaled.push_back(fs);
    }
    return t;
}

ScanTable sigma_min_scan(const Domain& dom, const ScanOptions& opt) {
    return sigma_min_scan(operator_pieces(dom, fitted_grid(dom, opt.n_r, opt.n_theta)), opt);
}

CVec bump(const FittedGrid& g, double sigma) {
    return sample(g, [&](const Vec2& x) { return cplx(std::exp(-(x - g.center).squaredNorm() / (2.0 * sigma * sigma))); });
}

std::vector<std::vector<Vec2>> attractor_cycles(const Domain& dom) {
    const Billiard bil(dom);
    const BilliardAnalysis an = analyze_dynamics(bil);
    std::vector<std::vector<Vec2>> cycles;
    if (!an.rational || an.sigma_minus.empty()) return cycles;
    std::vector<double> seen;
    for (const auto& p : an.sigma_minus) {
        bool dup = false;
        for (double s : seen) dup = dup || circle_distance(s, p.theta) < 1e-7;
        if (dup) continue;
        const Trajectory tr = trajectory(bil, p.theta, 2 * an.period);
        seen.insert(seen.end(), tr.theta.begin(), tr.theta.end());
        cycles.push_back(tr.points);
    }
    return cycles;
}

Eigen::VectorXd gradient_magnitude(const DiscreteOperator& op, const CVec& u) {
    const FittedGrid& g = op.grid();
    const int nt = g.n_theta, nr = g.n_r;
    auto val = [&](int i, int j) -> cplx {
        j = ((j % nt) + nt) % nt;
        if (i >= nr - 1) return 0.0;
        if (i < 0) {
            // across the center: ring -1 at theta is ring 0 at theta + 1/2
            return (nt % 2 == 0) ? u(g.index(0, (j + nt / 2) % nt)) : u(g.index(0, j));
        }
        return u(g.index(i, j));
    };
    Eigen::VectorXd out(g.unknowns());
    for (int i = 0; i + 1 < nr; ++i)
        for (int j = 0; j < nt; ++j) {
            const cplx ur = (val(i + 1, j) - val(i - 1, j)) / (2.0 * g.h);
            const cplx ut = (val(i, j + 1) - val(i, j - 1)) / (2.0 * g.dtheta);
            const Mat2 M = FittedGrid::map_jacobian(g.r(i), g.w[j], g.dw[j]);
            const Mat2 G = M.inverse();  // grad = G^T (u_r, u_theta)
            const cplx gx = G(0, 0) * ur + G(1, 0) * ut;
            const cplx gy = G(0, 1) * ur + G(1, 1) * ut;
            out(g.index(i, j)) = std::sqrt(std::norm(gx) + std::norm(gy));
        }
    return out;
}

double attractor_correlation(const DiscreteOperator& op, const CVec& u, const std::vector<std::vector<Vec2>>& cycles,
                             double s) {
    const FittedGrid& g = op.grid();
    const Eigen::VectorXd gm = gradient_magnitude(op, u);
    const int n = g.unknowns();
    Eigen::VectorXd prox(n);
    for (int i = 0; i + 1 < g.n_r; ++i)
        for (int j = 0; j < g.n_theta; ++j) {
            const Vec2 x = g.point(i, j);
            double d = std::numeric_limits<double>::infinity();
            for (const auto& poly : cycles)
                for (size_t k = 0; k + 1 < poly.size(); ++k) {
                    const Vec2 a = poly[k], b = poly[k + 1], ab = b - a;
                    const double l2 = ab.squaredNorm();
                    const double t = l2 > 0.0 ? std::clamp((x - a).dot(ab) / l2, 0.0, 1.0) : 0.0;
                    d = std::min(d, (a + t * ab - x).norm());
                }
            prox(g.index(i, j)) = std::exp(-d * d / (2.0 * s * s));
        }
    const Eigen::VectorXd w = op.pieces->W.head(n) / op.pieces->W.head(n).sum();
    const double ma = w.dot(gm), mb = w.dot(prox);
    const Eigen::ArrayXd da = gm.array() - ma, db = prox.array() - mb;
    const double cov = (w.array() * da * db).sum();
    const double va = (w.array() * da * da).sum(), vb = (w.array() * db * db).sum();
    return va > 0.0 && vb > 0.0 ? cov / std::sqrt(va * vb) : 0.0;
}

SweepResult viscosity_sweep(const Domain& dom, const std::vector<double>& nus, int n, double bump_sigma) {
    SweepResult res;
    res.cycles = attractor_cycles(dom);
    if (res.cycles.empty()) {
        const Billiard bil(dom);
        res.cycles.push_back(trajectory(bil, 0.0, 4).points);
    }
    const FittedGrid g = fitted_grid(dom, n, n);
    const auto pieces = operator_pieces(dom, g);
    const CVec f = bump(g, bump_sigma);
    for (double nu : nus) {
        SweepRow row;
        row.nu = nu;
        try {
            if (!(nu > 0.0)) throw SolverError("viscosity_sweep: nu must be positive");
            const DiscreteOperator op = assemble(pieces, cplx(dom.lambda()), nu);
            const Solution s = solve_pde(op, f);
            row.norms = grid_norms(op, s.u);
            row.correlation = attractor_correlation(op, s.u, res.cycles);
            row.u = s.u;
        } catch (const SolverError& e) {
            row.ok = false;
            row.error = e.what();
        }
        res.rows.push_back(std::move(row));
    }
    return res;
}

}  // namespace iw
