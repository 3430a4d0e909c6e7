#include <benchmark/benchmark.h>

#include <cmath>

#include "gflame/flows.hpp"
#include "gflame/kernels.hpp"

namespace {

using namespace gflame;

struct Setup {
    PeriodicGrid grid;
    ScalarField f;
    VelocitySamples v;
    ScalarField out;

    explicit Setup(int n)
        : grid(PeriodicGrid::square(n)),
          f(ScalarField::sample(grid, [](double x, double y) { return std::sin(6.0 * x) * std::cos(4.0 * y); })),
          v(FlowField::cellular(64.0).sample(grid)),
          out(grid) {}
};

template <bool Par>
void bm_hamiltonian(benchmark::State& state) {
    Setup s(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        if constexpr (Par) parallel::hamiltonian_into(s.f, s.v, {1.0, 0.0}, 1.0, 2, s.out);
        else reference::hamiltonian_into(s.f, s.v, {1.0, 0.0}, 1.0, 2, s.out);
        benchmark::DoNotOptimize(s.out.values().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(s.grid.size()));
}

template <bool Par>
void bm_laplacian(benchmark::State& state) {
    Setup s(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        if constexpr (Par) parallel::laplacian_into(s.f, s.out);
        else reference::laplacian_into(s.f, s.out);
        benchmark::DoNotOptimize(s.out.values().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(s.grid.size()));
}

}  // namespace

BENCHMARK(bm_hamiltonian<false>)->Arg(256)->Arg(512)->Name("hamiltonian/reference");
BENCHMARK(bm_hamiltonian<true>)->Arg(256)->Arg(512)->Name("hamiltonian/parallel");
BENCHMARK(bm_laplacian<false>)->Arg(256)->Arg(512)->Name("laplacian/reference");
BENCHMARK(bm_laplacian<true>)->Arg(256)->Arg(512)->Name("laplacian/parallel");

BENCHMARK_MAIN();
