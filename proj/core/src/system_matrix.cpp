#include "ls2d/system_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "ls2d/parallel.hpp"
#include "ls2d/quadrature.hpp"
#include "ls2d/special_functions.hpp"

namespace ls2d {

const char* entry_kind_name(EntryKind k) {
    switch (k) {
        case EntryKind::SelfOrColleague: return "self_or_colleague";
        case EntryKind::Coarse: return "coarse";
        case EntryKind::Fine: return "fine";
        case EntryKind::SeparatedFine: return "separated_fine";
        case EntryKind::Far: return "far";
    }
    return "?";
}

namespace {

// fine-neighbor slot from (T.ix - 2 B.ix, T.iy - 2 B.iy), ring order
int fine_slot(int ax, int ay) {
    static constexpr int table[4][4] = {
        // ay = -1: ax -1, 0, 1, 2
        {0, 1, 2, 3},
        // ay = 0
        {11, -1, -1, 4},
        // ay = 1
        {10, -1, -1, 5},
        // ay = 2
        {9, 8, 7, 6},
    };
    if (ax < -1 || ax > 2 || ay < -1 || ay > 2) return -1;
    return table[ay + 1][ax + 1];
}

// coarse-neighbor slot from (2 T.ix - B.ix, 2 T.iy - B.iy)
int coarse_slot(int kx, int ky) {
    static constexpr int table[4][4] = {
        // ky = -2: kx -2, -1, 0, 1
        {0, 1, 2, 3},
        // ky = -1
        {11, -1, -1, 4},
        // ky = 0
        {10, -1, -1, 5},
        // ky = 1
        {9, 8, 7, 6},
    };
    if (kx < -2 || kx > 1 || ky < -2 || ky > 1) return -1;
    return table[ky + 2][kx + 2];
}

}  // namespace

EntryContext::EntryContext(const QuadTree& tree, const InterpOperator& interp, TableCache& tables,
                           const RealField& q, const ScalarField& f, EntryParams params)
    : tree_(&tree), interp_(&interp), params_(params) {
    const int p = tree.params.p;
    if (p != interp.spec.p) throw ConfigError("EntryContext: tree and interp order mismatch");
    p2_ = p * p;
    n_ = static_cast<long>(tree.n_leaves()) * p2_;

    points_.resize(n_);
    q_.resize(n_);
    f_.resize(n_);
    const std::vector<Point2> unit = unit_grid_points(p);
    for (std::int32_t m = 0; m < tree.n_leaves(); ++m) {
        const TreeNode& leaf = tree.node(tree.leaves[m]);
        for (int g = 0; g < p2_; ++g) {
            const Point2 pt = leaf.geom.center + leaf.geom.side * unit[g];
            const long idx = static_cast<long>(m) * p2_ + g;
            points_[idx] = pt;
            q_[idx] = q(pt);
            f_[idx] = f(pt);
        }
    }

    const double kappa = tree.params.kappa;
    levels_.resize(tree.max_depth() + 1);
    for (std::int32_t id : tree.leaves) levels_[tree.node(id).geom.level].used = true;

    for (int lvl = 0; lvl < static_cast<int>(levels_.size()); ++lvl) {
        LevelData& ld = levels_[lvl];
        if (!ld.used) continue;
        ld.side = tree.domain.side / std::pow(2.0, lvl);
        const double z = kappa * ld.side;
        ld.far = std::make_unique<FarFieldMoments>(
            build_far_moments(kappa, ld.side, params_.L, interp, params_.nthreads));

        const bool split = z > 4.0;
        auto tab_colleague = tables.get(NearRelation::Colleague, p, params_.pmax, split);
        auto tab_fine = tables.get(NearRelation::Fine, p, params_.pmax, split);
        std::shared_ptr<const NearFieldTable> tab_coarse;
        if (!split) tab_coarse = tables.get(NearRelation::Coarse, p, params_.pmax, false);

        const HankelSeriesCoeffs coeffs = series_coeffs(split ? 0.5 * z : z, params_.pmax);
        const int nb = interp.spec.n_basis;
        const Eigen::MatrixXcd qdag = interp.Qdag.cast<Complex>();

        auto build_blocks = [&](const NearFieldTable& tab) {
            const int nslots = tab.n_slots;
            std::vector<Eigen::MatrixXcd> blocks(nslots);
            parallel_for(nslots, params_.nthreads, [&](long slot) {
                Eigen::MatrixXcd nv(p2_, nb);
                for (int g = 0; g < p2_; ++g)
                    for (int l = 0; l < nb; ++l) {
                        Complex v(0.0);
                        if (tab.child_split) {
                            for (int c = 0; c < 4; ++c)
                                v += near_entry(tab,
                                                tab.target_index(c, static_cast<int>(slot), g), l,
                                                0.5 * z, coeffs, 0.5 * ld.side);
                        } else {
                            v = near_entry(tab, tab.target_index(-1, static_cast<int>(slot), g),
                                           l, z, coeffs, ld.side);
                        }
                        nv(g, l) = v;
                    }
                // entry-layer sign: tables carry +(i/4), entries -(i/4)
                blocks[slot] = -nv * qdag;
            });
            return blocks;
        };
        ld.colleague = build_blocks(*tab_colleague);
        ld.fine = build_blocks(*tab_fine);
        if (tab_coarse) ld.coarse = build_blocks(*tab_coarse);
    }
}

EntryKind EntryContext::classify_pair(long i, long j) const {
    const QuadTree& tree = *tree_;
    const TreeNode& t = tree.node(tree.leaves[i / p2_]);
    const TreeNode& b = tree.node(tree.leaves[j / p2_]);
    const int lt = t.geom.level, lb = b.geom.level;
    if (lt == lb && std::abs(t.ix - b.ix) <= 1 && std::abs(t.iy - b.iy) <= 1)
        return EntryKind::SelfOrColleague;
    if (lt == lb - 1) {
        const int kx = static_cast<int>(2 * t.ix - b.ix), ky = static_cast<int>(2 * t.iy - b.iy);
        if (coarse_slot(kx, ky) >= 0) return EntryKind::Coarse;
    }
    if (lt == lb + 1) {
        const int ax = static_cast<int>(t.ix - 2 * b.ix), ay = static_cast<int>(t.iy - 2 * b.iy);
        if (fine_slot(ax, ay) >= 0) return EntryKind::Fine;
        // separated fine: parent of t is a colleague of b but t does not touch b
        const std::int64_t px = t.ix >> 1, py = t.iy >> 1;
        if (std::abs(px - b.ix) <= 1 && std::abs(py - b.iy) <= 1) return EntryKind::SeparatedFine;
    }
    return EntryKind::Far;
}

Complex EntryContext::v_entry(long i, long j) const {
    const QuadTree& tree = *tree_;
    const TreeNode& t = tree.node(tree.leaves[i / p2_]);
    const TreeNode& b = tree.node(tree.leaves[j / p2_]);
    const int lt = t.geom.level, lb = b.geom.level;
    const int gi = static_cast<int>(i % p2_), gj = static_cast<int>(j % p2_);
    const LevelData& ld = levels_[lb];

    if (lt == lb) {
        const int dx = static_cast<int>(t.ix - b.ix), dy = static_cast<int>(t.iy - b.iy);
        if (std::abs(dx) <= 1 && std::abs(dy) <= 1)
            return ld.colleague[(dy + 1) * 3 + (dx + 1)](gi, gj);
    } else if (lt == lb - 1) {
        const int slot =
            coarse_slot(static_cast<int>(2 * t.ix - b.ix), static_cast<int>(2 * t.iy - b.iy));
        if (slot >= 0) {
            if (ld.coarse.empty())
                throw NumericsError("v_entry: coarse pair at a level with kappa*side > 4");
            return ld.coarse[slot](gi, gj);
        }
    } else if (lt == lb + 1) {
        const int slot =
            fine_slot(static_cast<int>(t.ix - 2 * b.ix), static_cast<int>(t.iy - 2 * b.iy));
        if (slot >= 0) return ld.fine[slot](gi, gj);
    }

    // not tabulated: multipole, parent expansion when comfortably separated,
    // child expansions otherwise (separated-fine and marginal deep cases)
    const Point2 x = points_[i];
    const Point2 rel = x - b.geom.center;
    static thread_local HankelWorkspace ws;
    if (norm(rel) >= params_.far_margin * b.geom.side)
        return -eval_multipole(ld.far->Mdag.col(gj), kappa(), rel, b.geom.side, ws);
    Complex sum(0.0);
    for (int c = 0; c < 4; ++c) {
        const Point2 cc = b.geom.center + b.geom.side * kChildCenterUnit[c];
        sum += eval_multipole(ld.far->Mdag_child[c].col(gj), kappa(), x - cc,
                              0.5 * b.geom.side, ws);
    }
    return -sum;
}

Complex EntryContext::a_entry(long i, long j) const {
    const Complex v = v_entry(i, j);
    const double k = kappa();
    Complex a = k * k * q_[i] * v;
    if (i == j) a += 1.0;
    return a;
}

Complex EntryContext::far_eval(int level, Point2 target, long j) const {
    const TreeNode& b = tree_->node(tree_->leaves[j / p2_]);
    if (b.geom.level != level) throw ConfigError("far_eval: level does not match source leaf");
    static thread_local HankelWorkspace ws;
    return -eval_multipole(levels_[level].far->Mdag.col(j % p2_), kappa(),
                           target - b.geom.center, b.geom.side, ws);
}

Complex EntryContext::sepfine_eval(std::int32_t source_leaf, Point2 target, long j) const {
    const TreeNode& b = tree_->node(source_leaf);
    if (tree_->leaves[j / p2_] != source_leaf)
        throw ConfigError("sepfine_eval: unknown j does not live on the source leaf");
    const LevelData& ld = levels_[b.geom.level];
    static thread_local HankelWorkspace ws;
    Complex sum(0.0);
    for (int c = 0; c < 4; ++c) {
        const Point2 cc = b.geom.center + b.geom.side * kChildCenterUnit[c];
        sum += eval_multipole(ld.far->Mdag_child[c].col(j % p2_), kappa(), target - cc,
                              0.5 * b.geom.side, ws);
    }
    return -sum;
}

std::vector<Complex> EntryContext::apply_volume(std::span<const Complex> psi,
                                                const std::vector<Point2>& targets,
                                                double tol) const {
    if (static_cast<long>(psi.size()) != n_)
        throw ConfigError("apply_volume: density size mismatch");
    const QuadTree& tree = *tree_;
    const int nb = interp_->spec.n_basis;
    const double k = kappa();

    // per-leaf multipole coefficients sum_j Mdag(:, j) psi_j and polynomial
    // coefficients Qdag psi (near fallback)
    const std::int32_t nleaves = tree.n_leaves();
    std::vector<Eigen::VectorXcd> leaf_moments(nleaves);
    std::vector<Eigen::VectorXcd> leaf_coefs(nleaves);
    for (std::int32_t m = 0; m < nleaves; ++m) {
        Eigen::Map<const Eigen::VectorXcd> pm(psi.data() + static_cast<long>(m) * p2_, p2_);
        const LevelData& ld = levels_[tree.node(tree.leaves[m]).geom.level];
        leaf_moments[m] = ld.far->Mdag * pm;
        leaf_coefs[m] = interp_->Qdag.cast<Complex>() * pm;
    }

    std::vector<Complex> out(targets.size());
    parallel_for(static_cast<long>(targets.size()), params_.nthreads, [&](long ti) {
        const Point2 t = targets[ti];
        HankelWorkspace ws;
        Complex acc(0.0);
        for (std::int32_t m = 0; m < nleaves; ++m) {
            const TreeNode& leaf = tree.node(tree.leaves[m]);
            const Point2 rel = t - leaf.geom.center;
            if (norm(rel) >= params_.far_margin * leaf.geom.side) {
                acc -= eval_multipole(leaf_moments[m], k, rel, leaf.geom.side, ws);
                continue;
            }
            // near fallback: integrate the interpolated density directly
            const Eigen::VectorXcd& coef = leaf_coefs[m];
            const BoxGeom geom = leaf.geom;
            auto density = [&](Point2 y) {
                double bl[136];
                basis_eval_all(interp_->spec, (y.x - geom.center.x) / geom.side,
                               (y.y - geom.center.y) / geom.side, bl);
                Complex s(0.0);
                for (int l = 0; l < nb; ++l) s += coef(l) * bl[l];
                return s;
            };
            auto integrand = [&](Point2 y) -> Complex {
                const double r = dist(t, y);
                if (r == 0.0) return Complex(0.0);
                return hankel1(0, k * r) * density(y);
            };
            // split at the target so the log singularity sits on panel corners
            const Rect box = to_rect(geom);
            const double cx = std::clamp(t.x, box.lo.x, box.hi.x);
            const double cy = std::clamp(t.y, box.lo.y, box.hi.y);
            std::vector<double> xs{box.lo.x, box.hi.x}, ys{box.lo.y, box.hi.y};
            if (cx > box.lo.x && cx < box.hi.x) xs.insert(xs.begin() + 1, cx);
            if (cy > box.lo.y && cy < box.hi.y) ys.insert(ys.begin() + 1, cy);
            Complex part(0.0);
            for (std::size_t a = 0; a + 1 < xs.size(); ++a)
                for (std::size_t b = 0; b + 1 < ys.size(); ++b) {
                    Rect r{{xs[a], ys[b]}, {xs[a + 1], ys[b + 1]}};
                    if (r.area() <= 0.0) continue;
                    part += adaptive_quad_2d([&](Point2 y) { return integrand(y); }, r, tol).value;
                }
            acc += kEntryPrefactor * part;
        }
        out[ti] = acc;
    });
    return out;
}

}  // namespace ls2d
