#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

#include "ls2d/basis.hpp"
#include "ls2d/common.hpp"
#include "ls2d/multipole.hpp"
#include "ls2d/near_field_table.hpp"
#include "ls2d/quadtree.hpp"

namespace ls2d {

/// Geometric relation of (target point i, source leaf of j) driving the
/// evaluation path of an entry.
enum class EntryKind { SelfOrColleague, Coarse, Fine, SeparatedFine, Far };

const char* entry_kind_name(EntryKind k);

struct EntryParams {
    int L = 45;               // multipole truncation order
    int pmax = 60;            // near-table series order
    double far_margin = 1.5;  // parent expansion used for d >= far_margin * L_B
    int nthreads = 0;
};

/// O(1) random access to the Nystrom system A_ij = delta_ij + kappa^2 q(x_i) V_ij.
/// Immutable after construction; entry evaluation is pure and thread-safe.
class EntryContext {
  public:
    EntryContext(const QuadTree& tree, const InterpOperator& interp, TableCache& tables,
                 const RealField& q, const ScalarField& f, EntryParams params = {});

    long size() const { return n_; }
    double kappa() const { return tree_->params.kappa; }
    const QuadTree& tree() const { return *tree_; }
    const InterpOperator& interp() const { return *interp_; }
    const EntryParams& params() const { return params_; }
    const std::vector<double>& q_values() const { return q_; }
    const std::vector<Complex>& f_values() const { return f_; }
    Point2 point(long i) const { return points_[i]; }

    /// Kind of the (target grid point i, source leaf of j) pair, by the leaf
    /// taxonomy (colleague/coarse/fine/separated-fine/far).
    EntryKind classify_pair(long i, long j) const;

    Complex v_entry(long i, long j) const;
    Complex a_entry(long i, long j) const;

    /// Multipole evaluation of the source-leaf expansion of unknown j at an
    /// arbitrary target. `level` must be the source leaf's level. Refuses
    /// targets inside the expansion's invalid disk.
    Complex far_eval(int level, Point2 target, long j) const;

    /// Four-child expansion of the source leaf's basis (separated-fine path).
    Complex sepfine_eval(std::int32_t source_leaf, Point2 target, long j) const;

    /// u_scat at arbitrary targets for a density given by grid values psi.
    /// Far leaves use per-leaf multipole contractions; near leaves fall back
    /// to adaptive quadrature of the interpolated polynomial density.
    std::vector<Complex> apply_volume(std::span<const Complex> psi,
                                      const std::vector<Point2>& targets,
                                      double tol = 1e-10) const;

  private:
    struct LevelData {
        bool used = false;
        double side = 0.0;
        std::unique_ptr<FarFieldMoments> far;
        std::vector<Eigen::MatrixXcd> colleague;  // 9 blocks, p^2 x p^2
        std::vector<Eigen::MatrixXcd> coarse;     // 12 blocks (z <= 4 levels only)
        std::vector<Eigen::MatrixXcd> fine;       // 12 blocks
    };

    const QuadTree* tree_;
    const InterpOperator* interp_;
    EntryParams params_;
    long n_ = 0;
    int p2_ = 0;
    std::vector<Point2> points_;
    std::vector<double> q_;
    std::vector<Complex> f_;
    std::vector<LevelData> levels_;
};

}  // namespace ls2d
