#include <benchmark/benchmark.h>

#include "iwave/escape.hpp"
#include "iwave/kernels.hpp"

using namespace iw;

namespace {

const double kLam = 0.7071067811865476;

struct Setup {
    Billiard bil{Domain(preset_superellipse4(kPi / 10, kLam))};
    BilliardAnalysis an = analyze_dynamics(bil);
    EscapeField ef = build_escape_field(bil, an);
    DeformationMap dm{bil, ef.h, 0.02};
    std::vector<Vec2> pts = interior_grid(bil.domain(), 32);
};

const Setup& setup() {
    static const Setup s;
    return s;
}

template <auto F>
void BM_b2(benchmark::State& st) {
    const Setup& s = setup();  // built outside the timed loop
    for (auto _ : st) benchmark::DoNotOptimize(F(s.bil, static_cast<int>(st.range(0))));
}

template <auto F>
void BM_deformation(benchmark::State& st) {
    const Setup& s = setup();
    for (auto _ : st) benchmark::DoNotOptimize(F(s.dm, s.pts));
}

template <auto F>
void BM_nystrom(benchmark::State& st) {
    const NystromSystem sys = layer_ops(setup().dm, static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(F(sys));
}

template <auto F>
void BM_sigma(benchmark::State& st) {
    const Domain& dom = setup().bil.domain();
    const auto P = operator_pieces(dom, fitted_grid(dom, 32, 32));
    std::vector<std::pair<cplx, double>> jobs;
    for (int k = 0; k < 8; ++k) jobs.emplace_back(cplx(kLam - 0.02 + 0.005 * k, 0.01), 1e-3);
    for (auto _ : st) benchmark::DoNotOptimize(F(P, jobs));
}

}  // namespace

BENCHMARK(BM_b2<serial_b2_graph>)->Name("serial_b2_graph")->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_b2<parallel_b2_graph>)->Name("parallel_b2_graph")->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_deformation<serial_deformation_grid>)->Name("serial_deformation_grid")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_deformation<parallel_deformation_grid>)->Name("parallel_deformation_grid")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_nystrom<serial_nystrom_assemble>)->Name("serial_nystrom_assemble")->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_nystrom<parallel_nystrom_assemble>)->Name("parallel_nystrom_assemble")->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sigma<serial_sigma_cells>)->Name("serial_sigma_cells")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sigma<parallel_sigma_cells>)->Name("parallel_sigma_cells")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
