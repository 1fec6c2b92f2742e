#include <benchmark/benchmark.h>

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "vstab/grid_function.hpp"
#include "vstab/kernel_expr.hpp"
#include "vstab/volterra.hpp"

namespace {

using namespace vstab;

GridFunction random_real_grid(std::uint64_t seed, double a, double b,
                              std::size_t n, double radius) {
    std::mt19937_64 rng(seed);
    std::vector<std::complex<double>> values(n);
    for (auto& v : values) {
        double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v = {radius * (2.0 * u - 1.0), 0.0};
    }
    return GridFunction(a, b, std::move(values));
}

void BM_KernelEval(benchmark::State& state) {
    KernelExpr kernel = parse_kernel("cos(tau) + 0.25*sin(y)");
    KernelEvaluator eval(kernel);
    double tau = 0.0;
    for (auto _ : state) {
        tau += 1e-6;
        benchmark::DoNotOptimize(eval(0.0, tau, {0.5, 0.0}));
    }
}
BENCHMARK(BM_KernelEval);

void BM_ApplyPrefixSum(benchmark::State& state) {
    auto n = static_cast<std::size_t>(state.range(0));
    KernelProblem prob(parse_kernel("cos(tau) + 0.25*sin(y)"),
                       MTFunc::constant(0.25), 0.0, 1.0, n);
    GridFunction f = random_real_grid(1, 0.0, 1.0, n, 2.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            apply_operator(prob, f, ApplyStrategy::PrefixSum));
    state.SetComplexityN(static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ApplyPrefixSum)->Arg(101)->Arg(1001)->Arg(10001)->Complexity();

void BM_ApplyPerNode(benchmark::State& state) {
    auto n = static_cast<std::size_t>(state.range(0));
    KernelProblem prob(parse_kernel("cos(tau) + 0.25*sin(y)"),
                       MTFunc::constant(0.25), 0.0, 1.0, n);
    GridFunction f = random_real_grid(1, 0.0, 1.0, n, 2.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            apply_operator(prob, f, ApplyStrategy::PerNode));
    state.SetComplexityN(static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ApplyPerNode)->Arg(101)->Arg(1001)->Arg(4001)->Complexity();

void BM_SolveNonlinear(benchmark::State& state) {
    auto n = static_cast<std::size_t>(state.range(0));
    KernelProblem prob(parse_kernel("cos(tau) + 0.25*sin(y)"),
                       MTFunc::constant(0.25), 0.0, 1.0, n);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve(prob));
}
BENCHMARK(BM_SolveNonlinear)->Arg(1001)->Arg(10001);

void BM_SupDistance(benchmark::State& state) {
    auto n = static_cast<std::size_t>(state.range(0));
    GridFunction f = random_real_grid(2, 0.0, 1.0, n, 3.0);
    GridFunction g = random_real_grid(3, 0.0, 1.0, n, 3.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(sup_distance(f, g));
}
BENCHMARK(BM_SupDistance)->Arg(1001)->Arg(100001);

void BM_ParsePretty(benchmark::State& state) {
    const char* src = "cos(tau) + 0.25*sin(y) - exp(0.1*x)/(1 + abs(y))";
    for (auto _ : state) {
        KernelExpr k = parse_kernel(src);
        benchmark::DoNotOptimize(k.pretty());
    }
}
BENCHMARK(BM_ParsePretty);

} // namespace

BENCHMARK_MAIN();
