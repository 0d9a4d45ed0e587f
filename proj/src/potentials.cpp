#include "iwave/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "iwave/kernels.hpp"
#include "iwave/parallel.hpp"
#include "iwave/quadrature.hpp"

namespace iw {

namespace {

const cplx I(0.0, 1.0);

double mu_of(double lambda) { return std::sqrt(1.0 - lambda * lambda); }

// K'' = log|x|
double Kprim(double x) { return x == 0.0 ? 0.0 : 0.5 * x * x * std::log(std::abs(x)) - 0.75 * x * x; }

// int log|h m - t| hat_h(t) dt for the hat function of half-width h centred at 0
double log_weight(int m, double h) {
    return h * (std::log(h) + Kprim(m + 1.0) - 2.0 * Kprim(m) + Kprim(m - 1.0));
}

}  // namespace

cplx fundamental_constant(double lambda) { return I / (4.0 * kPi * lambda * mu_of(lambda)); }

cplx log_plus_i0(double a) {
    if (a == 0.0) throw SingularPointError("log(A + i0): A = 0");
    return a > 0.0 ? cplx(std::log(a)) : cplx(std::log(-a), kPi);
}

double branch_angle(cplx z) {
    double a = std::arg(z);
    if (a < -kPi / 2) a += 2.0 * kPi;
    return a;
}

cplx log_branch(cplx z) {
    if (z.real() == 0.0 && z.imag() <= 0.0) throw SingularPointError("log: argument on the cut iR_-");
    return cplx(std::log(std::abs(z)), branch_angle(z));
}

double char_product(double lambda, const Vec2& x) {
    return linear_form(lambda, Sign::Plus, x) * linear_form(lambda, Sign::Minus, x);
}

cplx char_product(double lambda, const CVec2& x) {
    const double mu = mu_of(lambda);
    const cplx a = x(0) / lambda + x(1) / mu, b = -x(0) / lambda + x(1) / mu;
    return a * b;
}

cplx fundamental_flat(double lambda, const Vec2& x) {
    const double a = char_product(lambda, x);
    // relative test: at lambda = 1/sqrt(2) the product on a characteristic ray rounds to ~1e-16, not 0
    const double scale = std::abs(x(0)) / lambda + std::abs(x(1)) / mu_of(lambda);
    if (std::abs(a) <= 1e-14 * scale * scale) throw SingularPointError("fundamental_flat: x on a characteristic line");
    return fundamental_constant(lambda) * log_plus_i0(a);
}

KernelSample fundamental_deformed(double lambda, const Vec2& x, const Vec2& y, const XiValue& vx,
                                  const XiValue& vy) {
    KernelSample k;
    k.x = x;
    k.y = y;
    const cplx a = char_product(lambda, CVec2(vx.xi - vy.xi));
    k.branch_angle = branch_angle(a);
    k.value = fundamental_constant(lambda) * log_branch(a) * vy.J.determinant();
    return k;
}

KernelSample fundamental_deformed(const DeformationMap& dm, const Vec2& x, const Vec2& y) {
    if ((x - y).norm() == 0.0) throw SingularPointError("fundamental_deformed: x = y");
    return fundamental_deformed(dm.lambda(), x, y, dm.eval(x), dm.eval(y));
}

namespace {

std::vector<std::pair<int, int>> random_pairs(int n, int pairs, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> U(0, n - 1);
    std::vector<std::pair<int, int>> out;
    out.reserve(pairs);
    while (static_cast<int>(out.size()) < pairs) {
        const int a = U(rng), b = U(rng);
        if (a != b) out.emplace_back(a, b);
    }
    return out;
}

}  // namespace

BranchStats branch_statistics(const DeformationMap& dm, int pairs, int grid_n, unsigned seed) {
    const auto pts = interior_grid(dm.domain(), grid_n);
    const auto vals = parallel_deformation_grid(dm, pts);
    BranchStats st;
    st.min_angle = std::numeric_limits<double>::infinity();
    st.max_angle = -st.min_angle;
    for (const auto& [a, b] : random_pairs(static_cast<int>(pts.size()), pairs, seed)) {
        const double ang = branch_angle(char_product(dm.lambda(), CVec2(vals[a].xi - vals[b].xi)));
        st.min_angle = std::min(st.min_angle, ang);
        st.max_angle = std::max(st.max_angle, ang);
        ++st.samples;
    }
    // the upper end is open: step past the largest angle
    double up = st.max_angle - kPi;
    while (kPi + up <= st.max_angle) up = std::nextafter(up, kPi);
    st.alpha0 = std::max({0.0, -st.min_angle, up});
    return st;
}

FactorizationFit factorization_fit(const DeformationMap& dm, int pairs, int grid_n, unsigned seed) {
    const auto pts = interior_grid(dm.domain(), grid_n);
    const auto pr = random_pairs(static_cast<int>(pts.size()), pairs, seed);
    const double lam = dm.lambda(), tau = dm.tau();
    const Vec2 Lp = lvec(lam, Sign::Plus), Lm = lvec(lam, Sign::Minus);
    const QuadRule& q = gauss_legendre01(6);
    struct Row {
        double re, im, v2;
        cplx zeta;
    };
    const auto rows = parallel_map_index<Row>(static_cast<int>(pr.size()), [&](int k) {
        const Vec2 x = pts[pr[k].first], y = pts[pr[k].second];
        CMat2 M = CMat2::Zero();
        for (size_t m = 0; m < q.x.size(); ++m) M += q.w[m] * dm.eval(y + q.x[m] * (x - y)).J;
        const CVec2 d = dm.xi(x) - dm.xi(y);
        const cplx zeta = char_product(lam, d);
        const cplx wp = linear_form(cplx(lam), Sign::Plus, CVec2(M * Lp.cast<cplx>()));
        const cplx wm = linear_form(cplx(lam), Sign::Minus, CVec2(M * Lm.cast<cplx>()));
        const cplx g = (zeta / (wp * wm) - char_product(lam, Vec2(x - y))) / (I * tau);
        const double v2 = (x - y).squaredNorm();
        return Row{g.real() / v2, std::abs(g.imag()) / (tau * v2), v2, zeta};
    });
    FactorizationFit fit;
    fit.samples = static_cast<int>(rows.size());
    fit.min_re = std::numeric_limits<double>::infinity();
    fit.max_re = -fit.min_re;
    for (const Row& r : rows) {
        fit.min_re = std::min(fit.min_re, r.re);
        fit.max_re = std::max(fit.max_re, r.re);
        fit.max_im = std::max(fit.max_im, r.im);
    }
    fit.C = fit.min_re > 0.0 ? std::max({fit.max_re, 1.0 / fit.min_re, fit.max_im, 1.0})
                             : std::numeric_limits<double>::infinity();
    fit.inequality_slack = std::numeric_limits<double>::infinity();
    for (const Row& r : rows)
        fit.inequality_slack =
            std::min(fit.inequality_slack, (r.zeta.imag() + fit.C * fit.C * tau * std::abs(r.zeta.real()) -
                                            tau * r.v2 / (2.0 * fit.C)) / r.v2);
    return fit;
}

Vec2 CharGrid::point(int i, int j) const {
    return (sp0 + i * h) * lvec(lambda, Sign::Plus) + (sm0 + j * h) * lvec(lambda, Sign::Minus);
}

double CharGrid::cell_area() const { return 0.5 * lambda * mu_of(lambda) * h * h; }

CharGrid char_grid(double lambda, const Vec2& center, double radius, int n) {
    CharGrid g;
    g.lambda = lambda;
    g.n = n;
    const double sp = linear_form(lambda, Sign::Plus, center), sm = linear_form(lambda, Sign::Minus, center);
    // |l^+-(x - center)| <= radius * |grad l^+-| on the disc
    const double R = radius * std::sqrt(1.0 / (lambda * lambda) + 1.0 / (1.0 - lambda * lambda));
    g.h = 2.0 * R / (n - 1);
    g.sp0 = sp - R;
    g.sm0 = sm - R;
    return g;
}

std::vector<cplx> apply_E_flat(const CharGrid& g, const std::vector<cplx>& f, double edge_tol) {
    const int n = g.n;
    const double h = g.h;
    if (static_cast<int>(f.size()) != n * n) throw std::invalid_argument("apply_E_flat: size mismatch");
    double fmax = 0.0, edge = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double a = std::abs(f[i * n + j]);
            fmax = std::max(fmax, a);
            if (i == 0 || j == 0 || i == n - 1 || j == n - 1) edge = std::max(edge, a);
        }
    if (edge > edge_tol * fmax) throw DomainError("apply_E_flat: support touches the grid boundary");

    std::vector<cplx> mp(n, 0.0), mm(n, 0.0);
    cplx total = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            mp[i] += h * f[i * n + j];
            mm[j] += h * f[i * n + j];
            total += h * h * f[i * n + j];
        }
    std::vector<double> w(2 * n - 1);
    for (int m = -(n - 1); m <= n - 1; ++m) w[m + n - 1] = log_weight(m, h);
    std::vector<cplx> lp(n, 0.0), lm(n, 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            lp[i] += w[i - k + n - 1] * mp[k];
            lm[i] += w[i - k + n - 1] * mm[k];
        }
    // B_kj = h sum_l sgn(j - l) f_kl, then G_ij = h sum_k sgn(i - k) B_kj
    std::vector<cplx> B(n * n), G(n * n);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k) {
        cplx tot = 0.0;
        for (int l = 0; l < n; ++l) tot += f[k * n + l];
        cplx below = 0.0;
        for (int j = 0; j < n; ++j) {
            const cplx above = tot - below - f[k * n + j];
            B[k * n + j] = h * (below - above);
            below += f[k * n + j];
        }
    }
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) {
        cplx tot = 0.0;
        for (int k = 0; k < n; ++k) tot += B[k * n + j];
        cplx below = 0.0;
        for (int i = 0; i < n; ++i) {
            const cplx above = tot - below - B[i * n + j];
            G[i * n + j] = h * (below - above);
            below += B[i * n + j];
        }
    }
    const cplx pref = fundamental_constant(g.lambda) * (0.5 * g.lambda * mu_of(g.lambda));
    std::vector<cplx> out(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out[i * n + j] = pref * (lp[i] + lm[j] + I * (kPi / 2) * (total - G[i * n + j]));
    return out;
}

std::vector<cplx> apply_E_deformed(const DeformationMap& dm, const std::vector<Vec2>& nodes, double h,
                                   const std::vector<cplx>& f) {
    const int n = static_cast<int>(nodes.size());
    if (static_cast<int>(f.size()) != n) throw std::invalid_argument("apply_E_deformed: size mismatch");
    const auto vals = parallel_deformation_grid(dm, nodes);
    const double lam = dm.lambda();
    const cplx c = fundamental_constant(lam);
    // self cell: int over the h-square of log A(J(x - y)) = 2 log rho + log A(J e_phi)
    constexpr int kPhi = 512;
    auto self = [&](const CMat2& J) {
        cplx acc = 0.0;
        for (int k = 0; k < kPhi; ++k) {
            const double phi = kTwoPi * (k + 0.5) / kPhi;
            const double cs = std::cos(phi), sn = std::sin(phi);
            const double R = 0.5 * h / std::max(std::abs(cs), std::abs(sn));
            const cplx la = log_branch(char_product(lam, CVec2(J * Vec2(cs, sn).cast<cplx>())));
            acc += R * R * std::log(R) - 0.5 * R * R + 0.5 * R * R * la;
        }
        return acc * (kTwoPi / kPhi);
    };
    std::vector<cplx> det(n);
    for (int j = 0; j < n; ++j) det[j] = vals[j].J.determinant();
    return parallel_map_index<cplx>(n, [&](int i) {
        cplx acc = self(vals[i].J) * det[i] * f[i];
        for (int j = 0; j < n; ++j) {
            if (j == i || f[j] == 0.0) continue;
            acc += h * h * log_branch(char_product(lam, CVec2(vals[i].xi - vals[j].xi))) * det[j] * f[j];
        }
        return c * acc;
    });
}

double kress_weight(double t, int n) {
    double s = 0.0;
    for (int m = 1; m < n / 2; ++m) s += std::cos(kTwoPi * m * t) / m;
    s += std::cos(kPi * n * t) / n;
    return -2.0 / n * s;
}

namespace {

cplx log_A(const NystromSystem& sys, const CVec2& d) {
    const cplx a = char_product(sys.lambda, d);
    return sys.tau == 0.0 ? log_plus_i0(a.real()) : log_branch(a);
}

// smooth remainder S(theta, theta') = log A(Xi - Xi') - log 4 sin^2 pi (theta - theta')
cplx remainder(const NystromSystem& sys, const CVec2& xi, const CVec2& dxi, double theta, int j) {
    const double t = theta - sys.theta[j];
    const double s = std::sin(kPi * t);
    if (std::abs(s) < 1e-14) return log_A(sys, dxi) - std::log(4.0 * kPi * kPi);
    return log_A(sys, CVec2(xi - sys.xi[j])) - std::log(4.0 * s * s);
}

}  // namespace

void nystrom_row(const NystromSystem& sys, int i, cplx* row) {
    const cplx c = fundamental_constant(sys.lambda);
    for (int j = 0; j < sys.n; ++j) {
        const cplx S = remainder(sys, sys.xi[i], sys.dxi[i], sys.theta[i], j);
        row[j] = c * sys.det[j] * (sys.kress[(i - j + sys.n) % sys.n] + S / static_cast<double>(sys.n));
    }
}

NystromSystem layer_ops(const DeformationMap& dm, int n) {
    if (n < 8 || n % 2) throw std::invalid_argument("layer_ops: n must be even and >= 8");
    NystromSystem sys;
    sys.n = n;
    sys.tau = dm.tau();
    sys.lambda = dm.lambda();
    sys.theta.resize(n);
    for (int j = 0; j < n; ++j) sys.theta[j] = static_cast<double>(j) / n;
    std::vector<Vec2> bpts(n);
    for (int j = 0; j < n; ++j) bpts[j] = dm.domain().z(sys.theta[j]);
    const auto vals = parallel_deformation_grid(dm, bpts);
    sys.xi.resize(n);
    sys.dxi.resize(n);
    sys.det.resize(n);
    for (int j = 0; j < n; ++j) {
        sys.xi[j] = dm.boundary(sys.theta[j]);
        sys.dxi[j] = dm.boundary_dtheta(sys.theta[j]);
        sys.det[j] = vals[j].J.determinant();
    }
    sys.kress.resize(n);
    for (int k = 0; k < n; ++k) sys.kress[k] = kress_weight(static_cast<double>(k) / n, n);
    sys.C = parallel_nystrom_assemble(sys);
    return sys;
}

cplx trace_at(const NystromSystem& sys, const DeformationMap& dm, const Eigen::VectorXcd& v, double theta) {
    const CVec2 xi = dm.boundary(theta), dxi = dm.boundary_dtheta(theta);
    cplx acc = 0.0;
    for (int j = 0; j < sys.n; ++j) {
        const cplx S = remainder(sys, xi, dxi, theta, j);
        acc += sys.det[j] * (kress_weight(theta - sys.theta[j], sys.n) + S / static_cast<double>(sys.n)) * v(j);
    }
    return fundamental_constant(sys.lambda) * acc;
}

cplx single_layer_eval(const NystromSystem& sys, const Eigen::VectorXcd& v, const DeformationMap& dm, const Vec2& x) {
    const CVec2 xi = dm.xi(x);
    cplx acc = 0.0;
    for (int j = 0; j < sys.n; ++j) acc += log_A(sys, CVec2(xi - sys.xi[j])) * sys.det[j] * v(j);
    return fundamental_constant(sys.lambda) * acc / static_cast<double>(sys.n);
}

cplx pairing(const NystromSystem& sys, const Eigen::VectorXcd& phi, const Eigen::VectorXcd& psi) {
    return (phi.array() * (sys.C * psi).array()).sum() / static_cast<double>(sys.n);
}

cplx kernel_K(const DeformationMap& dm, Sign s, double theta, double theta_p) {
    if (circle_distance(theta, theta_p) < 1e-15) throw SingularPointError("kernel_K: theta = theta'");
    const double lam = dm.lambda();
    const cplx num = linear_form(cplx(lam), s, dm.boundary_dtheta(theta));
    const CVec2 d = dm.boundary(theta) - dm.boundary(theta_p);
    const cplx den = linear_form(cplx(lam), s, d);
    const double scale = std::abs(d(0)) / lam + std::abs(d(1)) / mu_of(lam);
    if (std::abs(den) <= 1e-12 * scale) throw SingularPointError("kernel_K: l(Xi(theta) - Xi(theta')) = 0");
    const cplx det = dm.eval(dm.domain().z(theta_p)).J.determinant();
    return fundamental_constant(lam) * num / den * det;
}

cplx apply_T(const NystromSystem& sys, const DeformationMap& dm, Sign s, const Eigen::VectorXcd& v, double theta) {
    const double lam = sys.lambda;
    const cplx num = linear_form(cplx(lam), s, dm.boundary_dtheta(theta));
    const CVec2 xi = dm.boundary(theta);
    cplx acc = 0.0;
    for (int j = 0; j < sys.n; ++j) {
        const cplx den = linear_form(cplx(lam), s, CVec2(xi - sys.xi[j]));
        acc += num / den * sys.det[j] * v(j);
    }
    return fundamental_constant(lam) * acc / static_cast<double>(sys.n);
}

DensitySolve solve_boundary_density(const NystromSystem& sys, const Eigen::VectorXcd& phi, double alpha_rel,
                                    double warn_residual) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(sys.C, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double alpha = alpha_rel * sv(0);
    Eigen::VectorXcd coef = svd.matrixU().adjoint() * phi;
    for (int k = 0; k < sv.size(); ++k) coef(k) *= sv(k) / (sv(k) * sv(k) + alpha * alpha);
    DensitySolve out;
    out.v = svd.matrixV() * coef;
    out.condition = sv(0) / sv(sv.size() - 1);
    const double nphi = phi.norm();
    out.residual = (sys.C * out.v - phi).norm() / std::max(nphi, 1e-300);
    if (nphi == 0.0) out.residual = 0.0;
    out.warning = out.residual > warn_residual;
    return out;
}

double condition_number(const NystromSystem& sys) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(sys.C);
    const auto& sv = svd.singularValues();
    return sv(0) / sv(sv.size() - 1);
}

}  // namespace iw
