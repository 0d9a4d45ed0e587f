#pragma once

#include <utility>
#include <vector>

#include "iwave/billiard.hpp"
#include "iwave/deformation.hpp"
#include "iwave/geometry.hpp"
#include "iwave/potentials.hpp"
#include "iwave/solver.hpp"

namespace iw {

// Serial reference / OpenMP pairs for the grid-style evaluations. Each pair returns identical
// results; the parallel one is what the modules call.

// b^2 on n uniform parameters (Figure-1 graph)
std::vector<GammaValue> serial_b2_graph(const Billiard& bil, int n);
std::vector<GammaValue> parallel_b2_graph(const Billiard& bil, int n);

// Xi and D_x Xi at the given points
std::vector<XiValue> serial_deformation_grid(const DeformationMap& dm, const std::vector<Vec2>& pts);
std::vector<XiValue> parallel_deformation_grid(const DeformationMap& dm, const std::vector<Vec2>& pts);

// min_{i<j} |g_i - g_j| / |x_i - x_j|
double serial_min_pair_ratio(const std::vector<Vec2>& x, const std::vector<cplx>& g);
double parallel_min_pair_ratio(const std::vector<Vec2>& x, const std::vector<cplx>& g);

// Nystrom matrix of the restricted single layer, assembled row by row
Eigen::MatrixXcd serial_nystrom_assemble(const NystromSystem& sys);
Eigen::MatrixXcd parallel_nystrom_assemble(const NystromSystem& sys);

struct InviscidSample {
    double im;      // Im p^(tau)
    double abs_re;  // |Re p^(tau)|
    double rhs;     // (tau + Im omega) |xi|^2
};

// One sample per (J, omega, direction), ordered point-major then omega then direction.
std::vector<InviscidSample> serial_inviscid_samples(const std::vector<CMat2>& Js, const std::vector<cplx>& omegas,
                                                    const std::vector<Vec2>& dirs, double tau);
std::vector<InviscidSample> parallel_inviscid_samples(const std::vector<CMat2>& Js, const std::vector<cplx>& omegas,
                                                      const std::vector<Vec2>& dirs, double tau);

// min over (J, direction, t) of |p + i lambda t q| / (1 + t), including t -> infinity; returns (min, argmin t)
std::pair<double, double> serial_singular_samples(const std::vector<CMat2>& Js, double lambda,
                                                  const std::vector<Vec2>& dirs, const std::vector<double>& ts);
std::pair<double, double> parallel_singular_samples(const std::vector<CMat2>& Js, double lambda,
                                                    const std::vector<Vec2>& dirs, const std::vector<double>& ts);

// sigma_min cells of a scan, one (omega, nu) pair per job; each cell factorizes its own operator
std::vector<ScanCell> serial_sigma_cells(const std::shared_ptr<const OperatorPieces>& pieces,
                                         const std::vector<std::pair<cplx, double>>& jobs);
std::vector<ScanCell> parallel_sigma_cells(const std::shared_ptr<const OperatorPieces>& pieces,
                                           const std::vector<std::pair<cplx, double>>& jobs);

}  // namespace iw
