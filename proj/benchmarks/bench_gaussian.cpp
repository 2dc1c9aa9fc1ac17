#include <benchmark/benchmark.h>

#include "fmlab/gaussian.hpp"
#include "support/generators.hpp"

using namespace fmlab;

namespace {

GaussianPlan plan_of_dim(Eigen::Index d) {
    testgen::Rng rng(17 + static_cast<unsigned long>(d));
    return testgen::random_gaussian_plan(rng, d);
}

}  // namespace

static void MarginalAt(benchmark::State& state) {
    const GaussianPlan plan = plan_of_dim(state.range(0));
    double t = 0.0;
    for (auto _ : state) {
        t = t < 0.99 ? t + 0.01 : 0.0;
        benchmark::DoNotOptimize(gaussian::marginal_at(plan, t));
    }
}
BENCHMARK(MarginalAt)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

static void VelocityCoefficients(benchmark::State& state) {
    const GaussianPlan plan = plan_of_dim(state.range(0));
    double t = 0.0;
    for (auto _ : state) {
        t = t < 0.99 ? t + 0.01 : 0.0;
        benchmark::DoNotOptimize(gaussian::velocity_coefficients(plan, t));
    }
}
BENCHMARK(VelocityCoefficients)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

static void RecoverPlanFromV0(benchmark::State& state) {
    const GaussianPlan plan = plan_of_dim(state.range(0));
    const AffineMap v0 = gaussian::velocity_coefficients(plan, 0.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gaussian::recover_plan_from_v0(plan.mu0, plan.sigma0,
                                                                plan.mu1, plan.sigma1, v0));
    }
}
BENCHMARK(RecoverPlanFromV0)->Arg(2)->Arg(4)->Arg(8)->Arg(16);
