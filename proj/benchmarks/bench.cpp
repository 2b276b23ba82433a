#include "hyperwalk/ancona.hpp"
#include "hyperwalk/cayley.hpp"
#include "hyperwalk/geometry.hpp"
#include "hyperwalk/walk.hpp"

#include <benchmark/benchmark.h>

using namespace hyperwalk;

namespace {

void ball_free(benchmark::State& state) {
    const Group g = make_group(GroupSpec::free(2));
    for (auto _ : state) {
        auto ball = Ball::build(g, g.oracle.identity(), static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(ball.size());
    }
}
BENCHMARK(ball_free)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void ball_lattice(benchmark::State& state) {
    const Group g = make_group(GroupSpec::free_abelian(3));
    for (auto _ : state) {
        auto ball = Ball::build(g, g.oracle.identity(), static_cast<int>(state.range(0)));
        benchmark::DoNotOptimize(ball.size());
    }
}
BENCHMARK(ball_lattice)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void convolve_free(benchmark::State& state) {
    const Group g = make_group(GroupSpec::free(2));
    const auto ball = Ball::build(g, g.oracle.identity(), 10);
    const auto mu = Measure::uniform(g.generators);
    ConvolveOptions opt;
    opt.n_max = static_cast<int>(state.range(0));
    opt.watch = {0};
    for (auto _ : state) benchmark::DoNotOptimize(convolve(ball, mu, 0, opt).escaped.back());
    state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<std::int64_t>(ball.size()));
}
BENCHMARK(convolve_free)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void geodesics_lattice(benchmark::State& state) {
    const Group g = make_group(GroupSpec::free_abelian(2));
    const int n = static_cast<int>(state.range(0));
    const auto ball = Ball::build(g, g.oracle.identity(), 2 * n);
    const auto z = ball.require(g.oracle.evaluate(std::string(n, 'a') + std::string(n, 'b')));
    for (auto _ : state) {
        const GeodesicDag dag(ball, 0, z);
        benchmark::DoNotOptimize(dag.count());
    }
}
BENCHMARK(geodesics_lattice)->Arg(8)->Arg(16);

void bigons_lattice(benchmark::State& state) {
    const Group g = make_group(GroupSpec::free_abelian(2));
    BigonScanOptions opt;
    opt.L_max = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(bigon_scan(g, opt).bigons.size());
}
BENCHMARK(bigons_lattice)->Arg(10)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
