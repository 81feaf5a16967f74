#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ls2d/common.hpp"
#include "ls2d/quadtree.hpp"

namespace ls2d {

/// Pure entry accessor A(i, j); must be safe to call concurrently.
using EntryFn = std::function<Complex(long, long)>;

/// k-d ordering of the unknowns: recursive coordinate bisection of leaf-box
/// centers (longest axis, median split), each leaf's p^2 indices carried as a
/// unit. Clusters form a binary tree of index intervals of the permuted space.
struct Ordering {
    struct Cluster {
        long begin = 0, end = 0;  // interval in permuted index space
        int left = -1, right = -1;
    };
    std::vector<long> perm;  // permuted position -> original global index
    std::vector<Cluster> clusters;  // [0] is the root
    int n_leaf = 128;

    long size() const { return static_cast<long>(perm.size()); }
};

Ordering build_ordering(const QuadTree& tree, int n_leaf = 128);

struct AcaResult {
    Eigen::MatrixXcd U;  // m x rank
    Eigen::MatrixXcd V;  // n x rank; block ~ U * V^T
    int rank = 0;
    long entries_sampled = 0;
};

/// Partially pivoted adaptive cross approximation of the block
/// a(r0..r1, c0..c1) with random-column verification. Refuses past rank_cap.
AcaResult compress_block(const EntryFn& a, long r0, long r1, long c0, long c1, double eps,
                         int rank_cap = 1000);

struct HodlrStats {
    int max_rank = 0;
    long entries_sampled = 0;
    double factor_seconds = 0.0;
};

/// Hierarchical factorization: dense LU on cluster-leaf diagonal blocks,
/// low-rank off-diagonal blocks folded in by block Woodbury identities level
/// by level. Immutable after construction; solves are thread-safe.
class HodlrFactor {
  public:
    Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;
    Eigen::MatrixXcd solve_mat(Eigen::MatrixXcd rhs) const;

    const HodlrStats& stats() const { return stats_; }
    long size() const { return n_; }

  private:
    friend HodlrFactor hodlr_factor(const EntryFn&, const Ordering&, double, int, int);

    struct Node {
        long begin = 0, end = 0;
        int left = -1, right = -1;
        Eigen::PartialPivLU<Eigen::MatrixXcd> leaf_lu;  // cluster leaves
        Eigen::MatrixXcd Z1, Z2;    // A11^{-1} U12, A22^{-1} U21
        Eigen::MatrixXcd V12, V21;  // B12 ~ U12 V12^T, B21 ~ U21 V21^T
        Eigen::PartialPivLU<Eigen::MatrixXcd> core_lu;  // I + Vhat^T Z
    };

    void solve_in_place(int node, Eigen::Ref<Eigen::MatrixXcd> y) const;

    long n_ = 0;
    std::vector<Node> nodes_;
    HodlrStats stats_;
};

/// Factors the permuted operator a(perm[r], perm[c]). rank_cap refusal signals
/// a block that is not low-rank (ordering bug or kappa too large for HODLR).
HodlrFactor hodlr_factor(const EntryFn& a, const Ordering& ord, double eps_h,
                         int rank_cap = 1000, int nthreads = 0);

/// Solve in original index space: returns x with A x = rhs.
Eigen::VectorXcd hodlr_solve(const HodlrFactor& factor, const Ordering& ord,
                             const Eigen::VectorXcd& rhs);

/// Dense reference: assembles the full matrix (guarded to n <= 2e4) and
/// solves by partial-pivoted LU.
Eigen::VectorXcd dense_solve(const EntryFn& a, long n, const Eigen::VectorXcd& rhs,
                             int nthreads = 0);

/// ||A x - rhs||_inf / ||rhs||_inf over `nrows` deterministic sampled rows.
double sampled_row_residual(const EntryFn& a, long n, const Eigen::VectorXcd& x,
                            const Eigen::VectorXcd& rhs, int nrows, std::uint64_t seed,
                            int nthreads = 0);

}  // namespace ls2d
