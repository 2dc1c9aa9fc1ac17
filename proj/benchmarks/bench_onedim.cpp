#include <benchmark/benchmark.h>

#include "fmlab/onedim.hpp"
#include "support/generators.hpp"

using namespace fmlab;

namespace {

DiscretePlan1D plan_of_size(int n, int m) {
    testgen::Rng rng(23 + static_cast<unsigned long>(n * 31 + m));
    return testgen::random_discrete_plan(rng, n, m);
}

}  // namespace

static void ForwardSnapshot(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const DiscretePlan1D plan = plan_of_size(n, n);
    for (auto _ : state) benchmark::DoNotOptimize(onedim::forward_snapshot(plan, 0.37));
}
BENCHMARK(ForwardSnapshot)->Arg(3)->Arg(5)->Arg(10)->Arg(20);

static void CharFn(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const DiscretePlan1D plan = plan_of_size(n, n);
    for (auto _ : state) benchmark::DoNotOptimize(onedim::char_fn(plan, 1.3, 2.7));
}
BENCHMARK(CharFn)->Arg(3)->Arg(5)->Arg(10)->Arg(20);

static void RayIdentityResidual(benchmark::State& state) {
    const DiscretePlan1D plan = plan_of_size(5, 5);
    for (auto _ : state)
        benchmark::DoNotOptimize(onedim::ray_identity_residual(plan, 0.42, 1.9));
}
BENCHMARK(RayIdentityResidual);

static void UniquenessCertificate(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const DiscretePlan1D plan = plan_of_size(n, n);
    const std::vector<double> times{0.25, 0.5, 0.75};
    for (auto _ : state)
        benchmark::DoNotOptimize(
            onedim::uniqueness_certificate(plan.x_atoms, plan.y_atoms, times));
}
BENCHMARK(UniquenessCertificate)->Arg(3)->Arg(5)->Arg(8);

static void InvertFromSnapshots(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const DiscretePlan1D truth = plan_of_size(n, n);
    const std::vector<double> times{0.25, 0.5, 0.75};
    std::vector<onedim::Snapshot> snaps;
    for (double t : times) snaps.push_back({t, onedim::forward_snapshot(truth, t)});
    const onedim::SnapshotSet data(std::move(snaps));
    const Eigen::VectorXd r = truth.source_masses();
    const Eigen::VectorXd c = truth.target_masses();
    const std::vector<double> rm(r.data(), r.data() + n);
    const std::vector<double> cm(c.data(), c.data() + n);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            onedim::invert_from_snapshots(truth.x_atoms, truth.y_atoms, rm, cm, data));
}
BENCHMARK(InvertFromSnapshots)->Arg(3)->Arg(5)->Arg(8);
