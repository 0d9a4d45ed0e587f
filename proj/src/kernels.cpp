#include "iwave/kernels.hpp"

#include <algorithm>
#include <limits>

#include "iwave/parallel.hpp"
#include "iwave/symbols.hpp"

namespace iw {

std::vector<GammaValue> serial_b2_graph(const Billiard& bil, int n) {
    return serial_sample_circle<GammaValue>(n, [&](double t) { return bil.map(t, 2); });
}

std::vector<GammaValue> parallel_b2_graph(const Billiard& bil, int n) {
    return parallel_sample_circle<GammaValue>(n, [&](double t) { return bil.map(t, 2); });
}

std::vector<XiValue> serial_deformation_grid(const DeformationMap& dm, const std::vector<Vec2>& pts) {
    return serial_map_index<XiValue>(static_cast<int>(pts.size()), [&](int i) { return dm.eval(pts[i]); });
}

std::vector<XiValue> parallel_deformation_grid(const DeformationMap& dm, const std::vector<Vec2>& pts) {
    return parallel_map_index<XiValue>(static_cast<int>(pts.size()), [&](int i) { return dm.eval(pts[i]); });
}

namespace {

double row_min(const std::vector<Vec2>& x, const std::vector<cplx>& g, int i) {
    double m = std::numeric_limits<double>::infinity();
    for (size_t j = i + 1; j < x.size(); ++j) m = std::min(m, std::abs(g[i] - g[j]) / (x[i] - x[j]).norm());
    return m;
}

}  // namespace

double serial_min_pair_ratio(const std::vector<Vec2>& x, const std::vector<cplx>& g) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(x.size()); ++i) m = std::min(m, row_min(x, g, i));
    return m;
}

double parallel_min_pair_ratio(const std::vector<Vec2>& x, const std::vector<cplx>& g) {
    double m = std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(x.size());
#pragma omp parallel for schedule(dynamic, 8) reduction(min : m)
    for (int i = 0; i < n; ++i) m = std::min(m, row_min(x, g, i));
    return m;
}

Eigen::MatrixXcd serial_nystrom_assemble(const NystromSystem& sys) {
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> C(sys.n, sys.n);
    for (int i = 0; i < sys.n; ++i) nystrom_row(sys, i, C.row(i).data());
    return C;
}

Eigen::MatrixXcd parallel_nystrom_assemble(const NystromSystem& sys) {
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> C(sys.n, sys.n);
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < sys.n; ++i) nystrom_row(sys, i, C.row(i).data());
    return C;
}

namespace {

void inviscid_point(const CMat2& J, const std::vector<cplx>& omegas, const std::vector<Vec2>& dirs, double tau,
                    InviscidSample* out) {
    for (const cplx& w : omegas)
        for (const Vec2& d : dirs) {
            const cplx p = deformed_symbol(J, SymbolKind::P, w, 0.0, d);
            *out++ = {p.imag(), std::abs(p.real()), (tau + w.imag()) * d.squaredNorm()};
        }
}

std::pair<double, double> singular_point(const CMat2& J, double lambda, const std::vector<Vec2>& dirs,
                                         const std::vector<double>& ts) {
    std::pair<double, double> best{std::numeric_limits<double>::infinity(), 0.0};
    for (const Vec2& d : dirs) {
        const cplx p = deformed_symbol(J, SymbolKind::P, lambda, 0.0, d);
        const cplx q = deformed_symbol(J, SymbolKind::Q, lambda, 0.0, d);
        for (double t : ts) {
            const double r = std::abs(p + cplx(0.0, lambda * t) * q) / (1.0 + t);
            if (r < best.first) best = {r, t};
        }
        const double inf = lambda * std::abs(q);
        if (inf < best.first) best = {inf, std::numeric_limits<double>::infinity()};
    }
    return best;
}

}  // namespace

std::vector<InviscidSample> serial_inviscid_samples(const std::vector<CMat2>& Js, const std::vector<cplx>& omegas,
                                                    const std::vector<Vec2>& dirs, double tau) {
    const size_t per = omegas.size() * dirs.size();
    std::vector<InviscidSample> out(Js.size() * per);
    for (size_t i = 0; i < Js.size(); ++i) inviscid_point(Js[i], omegas, dirs, tau, out.data() + i * per);
    return out;
}

std::vector<InviscidSample> parallel_inviscid_samples(const std::vector<CMat2>& Js, const std::vector<cplx>& omegas,
                                                      const std::vector<Vec2>& dirs, double tau) {
    const size_t per = omegas.size() * dirs.size();
    std::vector<InviscidSample> out(Js.size() * per);
    const int n = static_cast<int>(Js.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) inviscid_point(Js[i], omegas, dirs, tau, out.data() + i * per);
    return out;
}

std::pair<double, double> serial_singular_samples(const std::vector<CMat2>& Js, double lambda,
                                                  const std::vector<Vec2>& dirs, const std::vector<double>& ts) {
    std::pair<double, double> best{std::numeric_limits<double>::infinity(), 0.0};
    for (const CMat2& J : Js) {
        const auto r = singular_point(J, lambda, dirs, ts);
        if (r.first < best.first) best = r;
    }
    return best;
}

std::pair<double, double> parallel_singular_samples(const std::vector<CMat2>& Js, double lambda,
                                                    const std::vector<Vec2>& dirs, const std::vector<double>& ts) {
    const int n = static_cast<int>(Js.size());
    std::vector<std::pair<double, double>> per(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) per[i] = singular_point(Js[i], lambda, dirs, ts);
    std::pair<double, double> best{std::numeric_limits<double>::infinity(), 0.0};
    for (const auto& r : per)
        if (r.first < best.first) best = r;
    return best;
}

std::vector<ScanCell> serial_sigma_cells(const std::shared_ptr<const OperatorPieces>& pieces,
                                         const std::vector<std::pair<cplx, double>>& jobs) {
    return serial_map_index<ScanCell>(static_cast<int>(jobs.size()),
                                      [&](int k) { return scan_cell(pieces, jobs[k].first, jobs[k].second); });
}

std::vector<ScanCell> parallel_sigma_cells(const std::shared_ptr<const OperatorPieces>& pieces,
                                           const std::vector<std::pair<cplx, double>>& jobs) {
    return parallel_map_index<ScanCell>(static_cast<int>(jobs.size()),
                                        [&](int k) { return scan_cell(pieces, jobs[k].first, jobs[k].second); });
}

}  // namespace iw
