#include <benchmark/benchmark.h>

#include "lindex/criteria.hpp"
#include "lindex/growth.hpp"
#include "lindex/index.hpp"
#include "lindex/jet.hpp"
#include "lindex/parser.hpp"

using namespace lindex;

namespace {

const Expr& example_F() {
    static const Expr f = parse_expression("exp(1/((1-z1)*(1-z2)))", 2);
    return f;
}

LField radial(double c) {
    const auto comp = parse_expression(std::to_string(c) + "*1/(1-|z|)", 2, Grammar::weight);
    return LField(1.5, {comp, comp});
}

void BM_JetFromExpr(benchmark::State& state) {
    const Point a{cplx{0.2, 0.1}, cplx{-0.1, 0.3}};
    const int order = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(jet_from_expr(example_F(), a, order));
}
BENCHMARK(BM_JetFromExpr)->Arg(8)->Arg(16)->Arg(24);

void BM_LocalIndex(benchmark::State& state) {
    const Jet j = jet_from_expr(example_F(), {cplx{0.2, 0.1}, cplx{-0.1, 0.3}}, 16);
    const LField L = radial(2.0);
    for (auto _ : state) benchmark::DoNotOptimize(local_index(j, L));
}
BENCHMARK(BM_LocalIndex);

void BM_SkeletonMax(benchmark::State& state) {
    const Expr f = parse_expression("exp(z1*z2)", 2);
    SkeletonOptions opt;
    opt.require_inside_ball = false;
    for (auto _ : state) benchmark::DoNotOptimize(skeleton_max(f, {0.0, 0.0}, {0.5, 0.5}, opt));
}
BENCHMARK(BM_SkeletonMax);

void BM_RayIntegral(benchmark::State& state) {
    const LField L = radial(2.0);
    const Radii R{0.5, 0.5};
    for (auto _ : state) benchmark::DoNotOptimize(ray_integral_max(L, R));
}
BENCHMARK(BM_RayIntegral);

}  // namespace

BENCHMARK_MAIN();
