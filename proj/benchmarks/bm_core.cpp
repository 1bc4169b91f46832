#include <benchmark/benchmark.h>

#include "emach/baselines.hpp"
#include "emach/erasure.hpp"
#include "emach/rng.hpp"
#include "emach/sampler.hpp"

namespace {

using namespace emach;

ObservationEnsemble make_ensemble(int num_spins, int unique_target, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<SpinConfiguration> samples;
    for (int u = 0; u < unique_target; ++u) {
        SpinConfiguration config(num_spins);
        for (int i = 0; i < num_spins; ++i) {
            config.set_spin(i, rng.uniform() < 0.5 ? -1 : +1);
        }
        samples.push_back(std::move(config));
        samples.push_back(std::move(config));  // duplicate to exercise counts
    }
    return ObservationEnsemble::from_samples(num_spins, samples);
}

void BM_em_step(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const auto ensemble = make_ensemble(m, 1024, 1);
    EmConfig config{.epsilon = 0.5, .learning_rate = 0.05};
    auto params = ParameterVector::zero(m);
    for (auto _ : state) {
        params = em_step(params, ensemble, config);
        benchmark::DoNotOptimize(params.w.data());
    }
    state.SetComplexityN(param_count(m));
}
BENCHMARK(BM_em_step)->Arg(20)->Arg(40)->Arg(80)->Complexity(benchmark::oN);

void BM_reweight(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const auto ensemble = make_ensemble(m, 1024, 2);
    GroundTruthSpec spec{m, 0.1, 1.0, 3};
    const auto params = draw_true_parameters(spec);
    for (auto _ : state) {
        auto reweighted = reweight(ensemble, params, 0.3);
        benchmark::DoNotOptimize(reweighted.weights.data());
    }
}
BENCHMARK(BM_reweight)->Arg(20)->Arg(80);

void BM_metropolis_sweeps(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const auto params = draw_true_parameters({m, 0.1, 2.0, 4});
    for (auto _ : state) {
        SamplerConfig config{.num_samples = 64, .method = SampleMethod::kMetropolis,
                             .burn_in_sweeps = 16, .thinning_sweeps = 4, .seed = 5};
        auto ensemble = sample_metropolis(params, config);
        benchmark::DoNotOptimize(ensemble.total_count());
    }
}
BENCHMARK(BM_metropolis_sweeps)->Arg(40)->Arg(100);

void BM_log_partition_exact(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const auto params = draw_true_parameters({m, 0.1, 1.0, 6});
    for (auto _ : state) {
        benchmark::DoNotOptimize(log_partition_exact(params));
    }
}
BENCHMARK(BM_log_partition_exact)->Arg(12)->Arg(16)->Arg(20);

void BM_mle_gradient(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const auto ensemble = make_ensemble(m, 512, 7);
    const auto params = draw_true_parameters({m, 0.1, 0.5, 8});
    for (auto _ : state) {
        benchmark::DoNotOptimize(mle_gradient(params, ensemble));
    }
}
BENCHMARK(BM_mle_gradient)->Arg(12)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
