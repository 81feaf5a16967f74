// Compression and solve benchmarks on a smooth separated-cluster kernel.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "ls2d/hodlr.hpp"

using namespace ls2d;

namespace {

EntryFn separated_kernel(std::vector<Point2>& rows, std::vector<Point2>& cols, long n) {
    rows.resize(n);
    cols.resize(n);
    for (long i = 0; i < n; ++i) {
        rows[i] = {i / double(n), 0.3 * std::sin(i * 0.1)};
        cols[i] = {4.0 + i / double(n), 0.2 * std::cos(i * 0.17)};
    }
    return [&rows, &cols](long r, long c) {
        const double d = dist(rows[r], cols[c]);
        return std::exp(Complex(0.0, 6.0 * d)) / d;
    };
}

}  // namespace

static void BM_AcaCompress(benchmark::State& state) {
    const long n = state.range(0);
    static std::vector<Point2> rows, cols;
    EntryFn kern = separated_kernel(rows, cols, n);
    for (auto _ : state) {
        AcaResult r = compress_block(kern, 0, n, 0, n, 1e-8);
        benchmark::DoNotOptimize(r.rank);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_AcaCompress)->Arg(256)->Arg(1024);
