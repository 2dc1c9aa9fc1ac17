#include <benchmark/benchmark.h>

#include "fmlab/gaussian.hpp"
#include "fmlab/transport.hpp"
#include "support/generators.hpp"

using namespace fmlab;

static void SamplePlanGaussian(benchmark::State& state) {
    testgen::Rng rng(47);
    const GaussianPlan plan = testgen::random_gaussian_plan(rng, 2);
    const Eigen::Index n = state.range(0);
    for (auto _ : state) benchmark::DoNotOptimize(transport::sample_plan(plan, n, 7));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(SamplePlanGaussian)->Arg(1000)->Arg(10000)->Arg(100000);

static void IntegrateParticles(benchmark::State& state) {
    testgen::Rng rng(48);
    const GaussianPlan plan = testgen::random_gaussian_plan(rng, 4);
    const AffineVelocityField field = gaussian::velocity_field(plan);
    const Eigen::MatrixXd x0 =
        transport::sample_gaussian(gaussian::marginal_at(plan, 0.0), state.range(0), 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(transport::integrate_particles(field, x0, 100));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 100);
}
BENCHMARK(IntegrateParticles)->Arg(1000)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

static void EstimateVelocity(benchmark::State& state) {
    testgen::Rng rng(49);
    const GaussianPlan plan = testgen::random_gaussian_plan(rng, 1);
    const transport::PairedSamples samples =
        transport::sample_plan(plan, state.range(0), 3);
    Eigen::MatrixXd queries(1, 41);
    for (int k = 0; k <= 40; ++k) queries(0, k) = -2.0 + 0.1 * k;
    for (auto _ : state)
        benchmark::DoNotOptimize(transport::estimate_velocity(samples, 0.3, queries, 0.1));
}
BENCHMARK(EstimateVelocity)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
