// Entry-evaluation microbenchmarks: the far path is the per-entry workhorse
// of the direct solver, the near path is a table lookup after context build.

#include <benchmark/benchmark.h>

#include <random>

#include "ls2d/near_field_table.hpp"
#include "ls2d/system_matrix.hpp"

using namespace ls2d;

namespace {

EntryContext& bench_ctx() {
    static QuadTree tree = [] {
        const double kappa = 8.0;
        auto q = [](Point2 x) { return 1.5 * std::exp(-40.0 * norm2(x)); };
        ScalarField f = [&](Point2 x) {
            return -kappa * kappa * q(x) * std::exp(Complex(0, kappa * x.x));
        };
        // uniform depth 4: N = 4096
        return build_tree({{0, 0}, 2.0, 0}, q, f, TreeParams{4, 0.25, 1e30, kappa, 30});
    }();
    static InterpOperator interp = build_interp(4);
    static TableCache cache(LS2D_BENCH_CACHE_DIR, 0);
    static EntryContext ctx = [] {
        auto q = [](Point2 x) { return 1.5 * std::exp(-40.0 * norm2(x)); };
        ScalarField f = [&](Point2 x) {
            return -8.0 * 8.0 * q(x) * std::exp(Complex(0, 8.0 * x.x));
        };
        return EntryContext(tree, interp, cache, q, f);
    }();
    return ctx;
}

std::pair<long, long> find_pair(const EntryContext& ctx, EntryKind kind) {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<long> ui(0, ctx.size() - 1);
    for (int guard = 0; guard < 1000000; ++guard) {
        const long i = ui(rng), j = ui(rng);
        if (ctx.classify_pair(i, j) == kind) return {i, j};
    }
    return {0, 0};
}

}  // namespace

static void BM_FarEval(benchmark::State& state) {
    EntryContext& ctx = bench_ctx();
    auto [i, j] = find_pair(ctx, EntryKind::Far);
    const Point2 x = ctx.point(i);
    const int level = ctx.tree().node(ctx.tree().leaves[j / 16]).geom.level;
    for (auto _ : state) benchmark::DoNotOptimize(ctx.far_eval(level, x, j));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FarEval);

static void BM_NearEntry(benchmark::State& state) {
    EntryContext& ctx = bench_ctx();
    auto [i, j] = find_pair(ctx, EntryKind::SelfOrColleague);
    for (auto _ : state) benchmark::DoNotOptimize(ctx.a_entry(i, j));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NearEntry);

static void BM_EntryMixed(benchmark::State& state) {
    EntryContext& ctx = bench_ctx();
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long> ui(0, ctx.size() - 1);
    for (auto _ : state) benchmark::DoNotOptimize(ctx.a_entry(ui(rng), ui(rng)));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EntryMixed);

static void BM_SeriesContraction(benchmark::State& state) {
    static TableCache cache(LS2D_BENCH_CACHE_DIR, 0);
    auto tab = cache.get(NearRelation::Colleague, 4, 60, false);
    const HankelSeriesCoeffs coeffs = series_coeffs(2.0, 60);
    int t = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(near_entry(*tab, t, t % 10, 2.0, coeffs, 1.0));
        t = (t + 1) % tab->n_targets;
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SeriesContraction);

BENCHMARK_MAIN();
