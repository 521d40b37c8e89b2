#include <benchmark/benchmark.h>

#include "randfield/gaussian.hpp"
#include "randfield/measure.hpp"
#include "randfield/meanfield.hpp"
#include "randfield/network.hpp"

using namespace randfield;

namespace {

ModelConfig bench_config() {
    ModelConfig cfg;
    cfg.coupling.J0 = 0.5;
    cfg.coupling.sigma0 = 0.5;
    cfg.coupling.tau0 = 0.05;
    cfg.coupling.c_tau = 0.1;
    cfg.initial.noise_scale = 0.2;
    cfg.initial.slope = {0.5};
    return cfg;
}

void NetworkStep(benchmark::State& state) {
    const ModelParams m = build_model(bench_config());
    const TimeGrid grid = m.grid();
    const std::size_t N = static_cast<std::size_t>(state.range(0));
    const auto pos = sample_positions(m, N, 1);
    const auto C = sample_couplings(m, pos, 1);
    const auto hist = build_initial(m.initial, pos, grid, 1);
    for (auto _ : state) {
        Ensemble ens = simulate_network(m, pos, C, hist, grid, 1);
        benchmark::DoNotOptimize(ens.members.back().values.back());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(N * N * grid.n_main));
}
BENCHMARK(NetworkStep)->Arg(50)->Arg(100)->Arg(200)->Arg(400);

void CholeskySample(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    CovMatrix cov = CovMatrix::zero(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cov.at(i, j) = 0.25 * std::exp(-0.05 * std::abs(static_cast<double>(i) -
                                                            static_cast<double>(j)));
    for (auto _ : state) {
        const GaussianDraws draws = cholesky_sample(cov, 1024, 7);
        benchmark::DoNotOptimize(draws.paths.back());
    }
}
BENCHMARK(CholeskySample)->Arg(50)->Arg(100)->Arg(200);

void PathDistanceCostMatrix(benchmark::State& state) {
    const ModelParams m = build_model(bench_config());
    const TimeGrid grid = m.grid();
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const Ensemble A = uncoupled_ensemble(m, n, grid, 3);
    const Ensemble B = uncoupled_ensemble(m, n, grid, 4);
    for (auto _ : state) {
        const DistanceReport rep =
            wasserstein2(A, B, m.lipschitz.K_tau, n, CouplingMethod::exact_assignment, 5);
        benchmark::DoNotOptimize(rep.value);
    }
}
BENCHMARK(PathDistanceCostMatrix)->Arg(64)->Arg(128)->Arg(256);

void MeanFieldIteration(benchmark::State& state) {
    const ModelParams m = build_model(bench_config());
    const TimeGrid grid = m.grid();
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const Ensemble prev = uncoupled_ensemble(m, n, grid, 11);
    for (auto _ : state) {
        Ensemble next = meanfield_map(m, prev, n, grid, 8, 12);
        benchmark::DoNotOptimize(next.members.back().values.back());
    }
}
BENCHMARK(MeanFieldIteration)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
