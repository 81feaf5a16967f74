#include <doctest.h>

#include <cmath>
#include <random>

#include "ls2d/hodlr.hpp"
#include "ls2d/system_matrix.hpp"

using namespace ls2d;

namespace {

TableCache& test_cache() {
    static TableCache cache(LS2D_TEST_CACHE_DIR, 0);
    return cache;
}

}  // namespace

TEST_CASE("ordering: identity, halves, shrinking clusters") {
    InterpOperator interp = build_interp(4);
    (void)interp;
    // one-leaf tree -> identity permutation
    QuadTree t1 = make_root_tree({{0, 0}, 1.0, 0}, TreeParams{});
    Ordering o1 = build_ordering(t1, 128);
    REQUIRE(o1.size() == 16);
    for (long i = 0; i < 16; ++i) CHECK(o1.perm[i] == i);

    // uniform 2-level tree: the top split separates the half-domains exactly
    QuadTree t2 = make_root_tree({{0, 0}, 2.0, 0}, TreeParams{});
    split_leaf(t2, 0);
    for (std::int32_t id : std::vector<std::int32_t>(t2.leaves.begin(), t2.leaves.end()))
        split_leaf(t2, id);
    REQUIRE(t2.n_leaves() == 16);
    Ordering o2 = build_ordering(t2, 16);  // one quad-leaf per cluster leaf
    const Ordering::Cluster& root = o2.clusters[0];
    REQUIRE(root.left >= 0);
    const Ordering::Cluster& left = o2.clusters[root.left];
    for (long k = left.begin; k < left.end; ++k) {
        const std::int32_t leaf = static_cast<std::int32_t>(o2.perm[k] / 16);
        CHECK(t2.node(t2.leaves[leaf]).geom.center.x < 0.0);
    }

    // permutation is a bijection and clusters partition every level
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        QuadTree t = make_root_tree({{0.2, 0.4}, 2.0, 0}, TreeParams{});
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int round = 0; round < 30; ++round) {
            const std::int32_t id = t.leaves[static_cast<std::size_t>(u(rng) * t.n_leaves())];
            if (t.node(id).geom.level < 5) split_leaf(t, id);
        }
        enforce_level_restriction(t);
        Ordering o = build_ordering(t, 64);
        std::vector<bool> seen(o.size(), false);
        for (long v : o.perm) {
            CHECK_FALSE(seen[v]);
            seen[v] = true;
        }
        // cluster diameters shrink monotonically down the tree
        auto diam = [&](const Ordering::Cluster& c) {
            double lox = 1e300, loy = 1e300, hix = -1e300, hiy = -1e300;
            for (long k = c.begin; k < c.end; k += 16) {
                const Point2 ctr = t.node(t.leaves[o.perm[k] / 16]).geom.center;
                lox = std::min(lox, ctr.x);
                hix = std::max(hix, ctr.x);
                loy = std::min(loy, ctr.y);
                hiy = std::max(hiy, ctr.y);
            }
            return std::hypot(hix - lox, hiy - loy);
        };
        for (const Ordering::Cluster& c : o.clusters) {
            if (c.left < 0) continue;
            CHECK(diam(o.clusters[c.left]) <= diam(c) + 1e-12);
            CHECK(diam(o.clusters[c.right]) <= diam(c) + 1e-12);
        }
    }
}

TEST_CASE("ACA compression: exact ranks and refusals") {
    // rank-1 outer product
    Eigen::VectorXcd u(80), v(60);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 80; ++i) u(i) = Complex(g(rng), g(rng));
    for (int j = 0; j < 60; ++j) v(j) = Complex(g(rng), g(rng));
    EntryFn rank1 = [&](long r, long c) { return u(r) * v(c); };
    AcaResult r1 = compress_block(rank1, 0, 80, 0, 60, 1e-12);
    CHECK(r1.rank == 1);
    Eigen::MatrixXcd approx = r1.U * r1.V.transpose();
    for (int i = 0; i < 80; i += 9)
        for (int j = 0; j < 60; j += 7)
            CHECK(std::abs(approx(i, j) - u(i) * v(j)) < 1e-12 * std::abs(u(i) * v(j)) + 1e-13);

    // zero block
    EntryFn zero = [](long, long) { return Complex(0.0); };
    AcaResult r0 = compress_block(zero, 0, 40, 0, 40, 1e-10);
    CHECK(r0.rank == 0);

    // full-rank iid noise cannot compress: rank cap refusal
    EntryFn noise = [](long r, long c) {
        std::uint64_t s = static_cast<std::uint64_t>(r) * 1000003ULL + c * 7919ULL + 13ULL;
        s ^= s >> 33;
        s *= 0xff51afd7ed558ccdULL;
        s ^= s >> 33;
        return Complex((s >> 11) * 0x1.0p-53 - 0.5, ((s * 2654435761ULL) >> 11) * 0x1.0p-53 - 0.5);
    };
    CHECK_THROWS_AS(compress_block(noise, 0, 64, 0, 64, 1e-10, 8), NumericsError);
}

TEST_CASE("recompression consistency on a smooth far block") {
    // geometric kernel block between two separated point clusters
    std::vector<Point2> rows, cols;
    for (int i = 0; i < 256; ++i) {
        rows.push_back({i / 256.0, 0.3 * std::sin(i * 0.1)});
        cols.push_back({4.0 + i / 256.0, 0.2 * std::cos(i * 0.17)});
    }
    EntryFn kern = [&](long r, long c) {
        return std::exp(Complex(0.0, 6.0 * dist(rows[r], cols[c]))) / dist(rows[r], cols[c]);
    };
    const double eps = 1e-8;
    AcaResult a = compress_block(kern, 0, 256, 0, 256, eps);
    AcaResult b = compress_block(kern, 0, 256, 0, 256, eps / 10.0);
    CHECK(a.rank <= b.rank);
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXcd x(256);
        for (int i = 0; i < 256; ++i) x(i) = Complex(g(rng), g(rng));
        Eigen::VectorXcd ya = a.U * (a.V.transpose() * x);
        Eigen::VectorXcd yb = b.U * (b.V.transpose() * x);
        CHECK((ya - yb).norm() <= 10.0 * eps * yb.norm());
    }
}

namespace {

EntryContext& solver_ctx() {
    static QuadTree tree = [] {
        const double kappa = 10.0;
        auto q = [](Point2 x) { return 1.5 * std::exp(-40.0 * norm2(x)); };
        ScalarField f = [&](Point2 x) {
            return -kappa * kappa * q(x) * std::exp(Complex(0, kappa * x.x));
        };
        // uniform depth 4 over [-1,1]^2: N = 4096
        return build_tree({{0, 0}, 2.0, 0}, q, f, TreeParams{4, 0.3, 1e30, kappa, 30});
    }();
    static InterpOperator interp = build_interp(4);
    static EntryContext ctx = [] {
        auto q = [](Point2 x) { return 1.5 * std::exp(-40.0 * norm2(x)); };
        ScalarField f = [&](Point2 x) {
            return -10.0 * 10.0 * q(x) * std::exp(Complex(0, 10.0 * x.x));
        };
        EntryParams ep;
        ep.nthreads = 2;
        return EntryContext(tree, interp, test_cache(), q, f, ep);
    }();
    return ctx;
}

}  // namespace

TEST_CASE("identity system factors trivially") {
    QuadTree t = make_root_tree({{0, 0}, 0.5, 0}, TreeParams{});
    split_leaf(t, 0);
    InterpOperator interp = build_interp(4);
    EntryContext ctx(t, interp, test_cache(), [](Point2) { return 0.0; },
                     [](Point2) { return Complex(0.0); });
    EntryFn a = [&](long r, long c) { return ctx.a_entry(r, c); };
    Ordering ord = build_ordering(t, 16);
    HodlrFactor f = hodlr_factor(a, ord, 1e-10);
    Eigen::VectorXcd rhs(ctx.size());
    for (long i = 0; i < ctx.size(); ++i) rhs(i) = Complex(std::sin(i * 0.7), std::cos(i * 0.3));
    Eigen::VectorXcd x = hodlr_solve(f, ord, rhs);
    CHECK((x - rhs).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("HODLR vs dense on the N=4096 scattering system") {
    EntryContext& ctx = solver_ctx();
    const long n = ctx.size();
    REQUIRE(n == 4096);
    EntryFn a = [&](long r, long c) { return ctx.a_entry(r, c); };

    Eigen::VectorXcd rhs(n);
    for (long i = 0; i < n; ++i) rhs(i) = ctx.f_values()[i];

    const double eps_h = 1e-9;
    Ordering ord = build_ordering(ctx.tree(), 128);
    HodlrFactor factor = hodlr_factor(a, ord, eps_h, 1000, 2);
    Eigen::VectorXcd x = hodlr_solve(factor, ord, rhs);

    // linearity and the zero map
    Eigen::VectorXcd x2 = hodlr_solve(factor, ord, Eigen::VectorXcd(2.0 * rhs));
    CHECK((x2 - 2.0 * x).lpNorm<Eigen::Infinity>() <=
          1e-14 * x.lpNorm<Eigen::Infinity>() * 2.0);
    Eigen::VectorXcd x0 = hodlr_solve(factor, ord, Eigen::VectorXcd::Zero(n));
    CHECK(x0.lpNorm<Eigen::Infinity>() == 0.0);

    Eigen::VectorXcd xd = dense_solve(a, n, rhs, 2);
    CHECK((x - xd).norm() <= 1e2 * eps_h * xd.norm());

    // residual certificates
    CHECK(sampled_row_residual(a, n, x, rhs, 200, 77, 2) <= 1e2 * eps_h);
    CHECK(sampled_row_residual(a, n, xd, rhs, 200, 77, 2) <= 1e-10);

    // random right-hand sides against the dense factorization
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        Eigen::VectorXcd b(n);
        for (long i = 0; i < n; ++i) b(i) = Complex(g(rng), g(rng));
        Eigen::VectorXcd xa = hodlr_solve(factor, ord, b);
        CHECK(sampled_row_residual(a, n, xa, b, 100, 123 + trial, 2) <= 1e2 * eps_h);
    }
}

TEST_CASE("dense_solve basics") {
    EntryFn ident = [](long r, long c) { return r == c ? Complex(1.0) : Complex(0.0); };
    Eigen::VectorXcd rhs(8);
    for (int i = 0; i < 8; ++i) rhs(i) = Complex(i, -i);
    CHECK((dense_solve(ident, 8, rhs) - rhs).norm() == 0.0);

    EntryFn diag = [](long r, long c) { return r == c ? Complex(2.0 + r) : Complex(0.0); };
    Eigen::VectorXcd xd = dense_solve(diag, 8, rhs);
    for (int i = 0; i < 8; ++i)
        CHECK(std::abs(xd(i) - rhs(i) / (2.0 + i)) < 1e-15 * std::abs(rhs(i)) + 1e-16);

    // random system: residual check
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd A(200, 200);
    for (int i = 0; i < 200; ++i)
        for (int j = 0; j < 200; ++j) A(i, j) = Complex(g(rng), g(rng)) + (i == j ? 10.0 : 0.0);
    EntryFn af = [&](long r, long c) { return A(r, c); };
    Eigen::VectorXcd b(200);
    for (int i = 0; i < 200; ++i) b(i) = Complex(g(rng), g(rng));
    Eigen::VectorXcd x = dense_solve(af, 200, b);
    CHECK((A * x - b).norm() <= 1e-12 * b.norm() * 100.0);

    CHECK_THROWS_AS(dense_solve(ident, 30000, rhs), ConfigError);
}

TEST_CASE("off-diagonal rank growth is sublinear") {
    EntryContext& ctx = solver_ctx();
    EntryFn a = [&](long r, long c) { return ctx.a_entry(r, c); };
    Ordering ord = build_ordering(ctx.tree(), 128);
    auto entry = [&](long r, long c) { return a(ord.perm[r], ord.perm[c]); };
    std::vector<double> sizes, ranks;
    for (long half : {256L, 512L, 1024L, 2048L}) {
        AcaResult r = compress_block(entry, 0, half, half, 2 * half, 1e-8);
        sizes.push_back(std::log(static_cast<double>(half)));
        ranks.push_back(std::log(static_cast<double>(std::max(r.rank, 1))));
    }
    // log-log slope < 0.8 over the three dyadic growth steps
    const int m = static_cast<int>(sizes.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        sx += sizes[i];
        sy += ranks[i];
        sxx += sizes[i] * sizes[i];
        sxy += sizes[i] * ranks[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    CHECK(slope < 0.8);
}
