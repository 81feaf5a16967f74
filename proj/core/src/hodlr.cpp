#include "ls2d/hodlr.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "ls2d/parallel.hpp"

namespace ls2d {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

Ordering build_ordering(const QuadTree& tree, int n_leaf) {
    const int p2 = tree.params.p * tree.params.p;
    const std::int32_t nl = tree.n_leaves();
    std::vector<std::int32_t> order(nl);
    std::iota(order.begin(), order.end(), 0);
    std::vector<Point2> centers(nl);
    for (std::int32_t m = 0; m < nl; ++m) centers[m] = tree.node(tree.leaves[m]).geom.center;

    Ordering ord;
    ord.n_leaf = n_leaf;
    ord.perm.reserve(static_cast<long>(nl) * p2);
    const long leaves_per_cluster = std::max<long>(1, n_leaf / p2);

    // recursive bisection over order[lo, hi); emits clusters and fills perm
    std::function<int(long, long)> rec = [&](long lo, long hi) -> int {
        const int id = static_cast<int>(ord.clusters.size());
        ord.clusters.push_back({});
        ord.clusters[id].begin = lo * p2;
        ord.clusters[id].end = hi * p2;
        if (hi - lo <= leaves_per_cluster) {
            for (long k = lo; k < hi; ++k)
                for (int g = 0; g < p2; ++g)
                    ord.perm.push_back(static_cast<long>(order[k]) * p2 + g);
            return id;
        }
        Point2 lo_pt{1e300, 1e300}, hi_pt{-1e300, -1e300};
        for (long k = lo; k < hi; ++k) {
            lo_pt.x = std::min(lo_pt.x, centers[order[k]].x);
            lo_pt.y = std::min(lo_pt.y, centers[order[k]].y);
            hi_pt.x = std::max(hi_pt.x, centers[order[k]].x);
            hi_pt.y = std::max(hi_pt.y, centers[order[k]].y);
        }
        const bool split_y = (hi_pt.y - lo_pt.y) > (hi_pt.x - lo_pt.x);
        std::stable_sort(order.begin() + lo, order.begin() + hi,
                         [&](std::int32_t a, std::int32_t b) {
                             return split_y ? centers[a].y < centers[b].y
                                            : centers[a].x < centers[b].x;
                         });
        const long mid = lo + (hi - lo) / 2;
        const int left = rec(lo, mid);
        const int right = rec(mid, hi);
        ord.clusters[id].left = left;
        ord.clusters[id].right = right;
        return id;
    };
    rec(0, nl);
    return ord;
}

AcaResult compress_block(const EntryFn& a, long r0, long r1, long c0, long c1, double eps,
                         int rank_cap) {
    // entries below this are treated as exact zeros: the solver works on
    // unit-scale second-kind systems, and complex division by pivots with
    // |piv|^2 below the denormal range produces infinities
    constexpr double kAbsFloor = 1e-150;
    const long m = r1 - r0, n = c1 - c0;
    AcaResult res;
    const int max_rank = static_cast<int>(std::min<long>({m, n, rank_cap}));
    Eigen::MatrixXcd U(m, std::min<long>(16, max_rank));
    Eigen::MatrixXcd V(n, std::min<long>(16, max_rank));
    int rank = 0;
    long sampled = 0;
    double fro2 = 0.0;

    std::vector<bool> row_used(m, false), col_used(n, false);
    auto grow = [&](Eigen::MatrixXcd& mat, int needed) {
        if (mat.cols() < needed)
            mat.conservativeResize(Eigen::NoChange, std::min<int>(2 * needed, max_rank));
    };

    long pivot_row = m / 2;
    auto add_cross_from_row = [&](long pr) -> bool {
        // residual row: a(pr, :) - U(pr, :) V^T
        Eigen::VectorXcd r(n);
        for (long j = 0; j < n; ++j) r(j) = a(r0 + pr, c0 + j);
        sampled += n;
        if (rank > 0) r -= V.leftCols(rank) * U.row(pr).head(rank).transpose();
        row_used[pr] = true;
        long pj = -1;
        double best = 0.0;
        for (long j = 0; j < n; ++j)
            if (!col_used[j] && std::abs(r(j)) > best) {
                best = std::abs(r(j));
                pj = j;
            }
        if (pj < 0 || best < kAbsFloor) return false;
        Eigen::VectorXcd c(m);
        for (long i = 0; i < m; ++i) c(i) = a(r0 + i, c0 + pj);
        sampled += m;
        if (rank > 0) c -= U.leftCols(rank) * V.row(pj).head(rank).transpose();
        col_used[pj] = true;
        const Complex piv = c(pr);
        if (std::abs(piv) < kAbsFloor) return false;
        r /= piv;
        grow(U, rank + 1);
        grow(V, rank + 1);
        U.col(rank) = c;
        V.col(rank) = r;
        // Frobenius estimate of the accumulated approximation
        const double uu = c.squaredNorm(), vv = r.squaredNorm();
        double cross = 0.0;
        for (int l = 0; l < rank; ++l)
            cross += 2.0 * std::real(U.col(l).dot(c) * std::conj(V.col(l).dot(r)));
        fro2 += uu * vv + cross;
        ++rank;
        // next pivot row: largest new-column residual among unused rows
        long pr_next = -1;
        double rbest = 0.0;
        for (long i = 0; i < m; ++i)
            if (!row_used[i] && std::abs(c(i)) > rbest) {
                rbest = std::abs(c(i));
                pr_next = i;
            }
        pivot_row = pr_next >= 0 ? pr_next : (pr + 1) % m;
        return true;
    };

    // main sweep
    int stale_rows = 0;
    while (rank < max_rank) {
        if (row_used[pivot_row]) {
            long nr = -1;
            for (long i = 0; i < m; ++i)
                if (!row_used[i]) {
                    nr = i;
                    break;
                }
            if (nr < 0) break;
            pivot_row = nr;
        }
        if (!add_cross_from_row(pivot_row)) {
            if (++stale_rows > 2) break;  // block appears (numerically) exhausted
            continue;
        }
        stale_rows = 0;
        if (U.col(rank - 1).norm() * V.col(rank - 1).norm() <=
            eps * std::sqrt(std::max(fro2, 1e-300)))
            break;
    }
    // drop trailing crosses already below the tolerance
    while (rank > 1 && U.col(rank - 1).norm() * V.col(rank - 1).norm() <=
                           0.5 * eps * std::sqrt(std::max(fro2, 1e-300)))
        --rank;

    // verification on deterministic random columns; failed columns are fed
    // back into the cross sweep
    std::uint64_t seed = 0x5851f42d4c957f2dULL ^ (static_cast<std::uint64_t>(r0) << 32) ^
                         static_cast<std::uint64_t>(c0) ^ (static_cast<std::uint64_t>(m) << 16) ^
                         static_cast<std::uint64_t>(n);
    const double fro = std::sqrt(std::max(fro2, 0.0));
    for (int round = 0; round < 64; ++round) {
        const int nver = 4;
        double worst = 0.0;
        long worst_col = -1, worst_row = -1;
        double col_norm2 = 0.0, err_norm2 = 0.0;
        for (int v = 0; v < nver; ++v) {
            const long j = static_cast<long>(splitmix64(seed) % static_cast<std::uint64_t>(n));
            Eigen::VectorXcd c(m);
            for (long i = 0; i < m; ++i) c(i) = a(r0 + i, c0 + j);
            sampled += m;
            col_norm2 += c.squaredNorm();
            if (rank > 0) c -= U.leftCols(rank) * V.row(j).head(rank).transpose();
            err_norm2 += c.squaredNorm();
            long imax = 0;
            for (long i = 1; i < m; ++i)
                if (std::abs(c(i)) > std::abs(c(imax))) imax = i;
            if (std::abs(c(imax)) > worst) {
                worst = std::abs(c(imax));
                worst_col = j;
                worst_row = imax;
            }
        }
        const double scale = std::max({std::sqrt(col_norm2), fro, kAbsFloor});
        if (std::sqrt(err_norm2) <= eps * scale) break;
        if (worst_col < 0 || !std::isfinite(err_norm2))
            throw NumericsError(
                "compress_block: non-finite residual during verification (rows " +
                std::to_string(r0) + ".." + std::to_string(r1) + ", cols " + std::to_string(c0) +
                ".." + std::to_string(c1) + ", rank " + std::to_string(rank) + ")");
        if (rank >= max_rank)
            throw NumericsError("compress_block: rank cap " + std::to_string(rank_cap) +
                                " exceeded; block is not low-rank at eps = " +
                                std::to_string(eps));
        // fold the worst verification column in as the next cross
        col_used[worst_col] = false;
        row_used[worst_row] = false;
        pivot_row = worst_row;
        add_cross_from_row(pivot_row);
    }

    res.U = U.leftCols(rank);
    res.V = V.leftCols(rank);
    res.rank = rank;
    res.entries_sampled = sampled;
    return res;
}

HodlrFactor hodlr_factor(const EntryFn& a, const Ordering& ord, double eps_h, int rank_cap,
                         int nthreads) {
    const auto t0 = std::chrono::steady_clock::now();
    HodlrFactor f;
    f.n_ = ord.size();
    f.nodes_.resize(ord.clusters.size());
    std::vector<long> sampled(ord.clusters.size(), 0);
    std::vector<int> ranks(ord.clusters.size(), 0);

    auto entry = [&](long r, long c) { return a(ord.perm[r], ord.perm[c]); };

    std::function<void(int, int)> build = [&](int ci, int depth) {
        const Ordering::Cluster& cl = ord.clusters[ci];
        HodlrFactor::Node& node = f.nodes_[ci];
        node.begin = cl.begin;
        node.end = cl.end;
        node.left = cl.left;
        node.right = cl.right;
        const long nrows = cl.end - cl.begin;
        if (cl.left < 0) {
            Eigen::MatrixXcd block(nrows, nrows);
            for (long i = 0; i < nrows; ++i)
                for (long j = 0; j < nrows; ++j) block(i, j) = entry(cl.begin + i, cl.begin + j);
            sampled[ci] += nrows * nrows;
            node.leaf_lu.compute(block);
            const auto& lu = node.leaf_lu.matrixLU();
            for (long i = 0; i < nrows; ++i)
                if (std::abs(lu(i, i)) < 1e-14)
                    throw NumericsError("hodlr_factor: singular leaf diagonal block");
            return;
        }
        const Ordering::Cluster& c1 = ord.clusters[cl.left];
        const Ordering::Cluster& c2 = ord.clusters[cl.right];
        // children factored first (concurrently near the top of the tree)
        if (depth < 2 && nthreads != 1) {
            std::exception_ptr err;
            std::thread worker([&]() {
                try {
                    build(cl.left, depth + 1);
                } catch (...) {
                    err = std::current_exception();
                }
            });
            try {
                build(cl.right, depth + 1);
            } catch (...) {
                worker.join();
                throw;
            }
            worker.join();
            if (err) std::rethrow_exception(err);
        } else {
            build(cl.left, depth + 1);
            build(cl.right, depth + 1);
        }

        AcaResult b12 = compress_block(entry, c1.begin, c1.end, c2.begin, c2.end, eps_h, rank_cap);
        AcaResult b21 = compress_block(entry, c2.begin, c2.end, c1.begin, c1.end, eps_h, rank_cap);
        sampled[ci] += b12.entries_sampled + b21.entries_sampled;
        ranks[ci] = std::max(b12.rank, b21.rank);

        node.V12 = std::move(b12.V);
        node.V21 = std::move(b21.V);
        const int r12 = b12.rank, r21 = b21.rank;
        // Z = blockdiag(A11, A22)^{-1} [U12 ; U21] via child solves
        node.Z1 = b12.U;
        node.Z2 = b21.U;
        if (r12 > 0) f.solve_in_place(cl.left, node.Z1);
        if (r21 > 0) f.solve_in_place(cl.right, node.Z2);

        Eigen::MatrixXcd S = Eigen::MatrixXcd::Identity(r12 + r21, r12 + r21);
        if (r12 > 0 && r21 > 0) {
            S.topRightCorner(r12, r21) = node.V12.transpose() * node.Z2;
            S.bottomLeftCorner(r21, r12) = node.V21.transpose() * node.Z1;
        }
        node.core_lu.compute(S);
        const auto& lu = node.core_lu.matrixLU();
        for (int i = 0; i < r12 + r21; ++i)
            if (std::abs(lu(i, i)) < 1e-14)
                throw NumericsError("hodlr_factor: singular Woodbury core");
    };
    build(0, 0);

    for (std::size_t i = 0; i < sampled.size(); ++i) {
        f.stats_.entries_sampled += sampled[i];
        f.stats_.max_rank = std::max(f.stats_.max_rank, ranks[i]);
    }
    f.stats_.factor_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return f;
}

void HodlrFactor::solve_in_place(int ni, Eigen::Ref<Eigen::MatrixXcd> y) const {
    const Node& node = nodes_[ni];
    const long n1 = node.left >= 0 ? nodes_[node.left].end - nodes_[node.left].begin : 0;
    if (node.left < 0) {
        y = node.leaf_lu.solve(y);
        return;
    }
    const long n = node.end - node.begin;
    solve_in_place(node.left, y.topRows(n1));
    solve_in_place(node.right, y.bottomRows(n - n1));
    const int r12 = static_cast<int>(node.Z1.cols());
    const int r21 = static_cast<int>(node.Z2.cols());
    if (r12 + r21 == 0) return;
    Eigen::MatrixXcd t(r12 + r21, y.cols());
    if (r12 > 0) t.topRows(r12) = node.V12.transpose() * y.bottomRows(n - n1);
    if (r21 > 0) t.bottomRows(r21) = node.V21.transpose() * y.topRows(n1);
    t = node.core_lu.solve(t);
    if (r12 > 0) y.topRows(n1) -= node.Z1 * t.topRows(r12);
    if (r21 > 0) y.bottomRows(n - n1) -= node.Z2 * t.bottomRows(r21);
}

Eigen::VectorXcd HodlrFactor::solve(const Eigen::VectorXcd& rhs) const {
    Eigen::MatrixXcd y = rhs;
    solve_in_place(0, y);
    return y.col(0);
}

Eigen::MatrixXcd HodlrFactor::solve_mat(Eigen::MatrixXcd rhs) const {
    solve_in_place(0, rhs);
    return rhs;
}

Eigen::VectorXcd hodlr_solve(const HodlrFactor& factor, const Ordering& ord,
                             const Eigen::VectorXcd& rhs) {
    const long n = ord.size();
    Eigen::VectorXcd pr(n);
    for (long i = 0; i < n; ++i) pr(i) = rhs(ord.perm[i]);
    const Eigen::VectorXcd px = factor.solve(pr);
    Eigen::VectorXcd x(n);
    for (long i = 0; i < n; ++i) x(ord.perm[i]) = px(i);
    return x;
}

Eigen::VectorXcd dense_solve(const EntryFn& a, long n, const Eigen::VectorXcd& rhs,
                             int nthreads) {
    if (n > 20000) throw ConfigError("dense_solve: n exceeds the 2e4 memory guard");
    Eigen::MatrixXcd A(n, n);
    parallel_for(n, nthreads, [&](long i) {
        for (long j = 0; j < n; ++j) A(i, j) = a(i, j);
    });
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(std::move(A));
    return lu.solve(rhs);
}

double sampled_row_residual(const EntryFn& a, long n, const Eigen::VectorXcd& x,
                            const Eigen::VectorXcd& rhs, int nrows, std::uint64_t seed,
                            int nthreads) {
    nrows = static_cast<int>(std::min<long>(nrows, n));
    std::vector<long> rows(nrows);
    std::uint64_t state = seed;
    for (int k = 0; k < nrows; ++k)
        rows[k] = static_cast<long>(splitmix64(state) % static_cast<std::uint64_t>(n));
    std::vector<double> res(nrows, 0.0);
    parallel_for(nrows, nthreads, [&](long k) {
        Complex acc(0.0);
        const long i = rows[k];
        for (long j = 0; j < n; ++j) acc += a(i, j) * x(j);
        res[k] = std::abs(acc - rhs(i));
    });
    const double rmax = *std::max_element(res.begin(), res.end());
    const double bmax = rhs.lpNorm<Eigen::Infinity>();
    return rmax / std::max(bmax, 1e-300);
}

}  // namespace ls2d
