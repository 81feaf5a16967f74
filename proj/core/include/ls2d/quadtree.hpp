#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "ls2d/common.hpp"

namespace ls2d {

using ScalarField = std::function<Complex(Point2)>;
using RealField = std::function<double(Point2)>;

struct TreeParams {
    int p = 4;
    double m_ppw = 0.5;     // leaves satisfy kappa * side < 2*pi*m_ppw
    double eps_data = 1e-8;
    double kappa = 1.0;
    int max_level = 30;
};

struct TreeNode {
    BoxGeom geom;
    std::int32_t parent = -1;
    std::array<std::int32_t, 4> children{-1, -1, -1, -1};  // [ix + 2*iy] order
    std::int32_t leaf_index = -1;
    std::int32_t ix = 0, iy = 0;  // dyadic coordinates at geom.level

    bool is_leaf() const { return children[0] < 0; }
};

struct QuadTree {
    BoxGeom domain;
    TreeParams params;
    std::vector<TreeNode> nodes;
    std::vector<std::int32_t> leaves;  // leaf_index -> node id

    const TreeNode& node(std::int32_t id) const { return nodes[id]; }
    std::int32_t n_leaves() const { return static_cast<std::int32_t>(leaves.size()); }
    int max_depth() const;

    /// Node at exactly (level, ix, iy), or -1 when that region is covered by
    /// a shallower leaf (or out of range).
    std::int32_t find_node(int level, std::int64_t ix, std::int64_t iy) const;
};

struct NeighborLists {
    std::vector<std::int32_t> colleagues;      // same level, leaf or internal; includes self
    std::vector<std::int32_t> coarse;          // leaves one level up
    std::vector<std::int32_t> fine;            // leaves one level down, touching
    std::vector<std::int32_t> separated_fine;  // leaves one level down, not touching
};

/// True iff the p-th order tensor Chebyshev interpolant of g on the box
/// matches g at the 4 p^2 child-box Chebyshev nodes to
/// eps * max(1, max |g| over those nodes).
bool resolution_test(const BoxGeom& box, const ScalarField& g, int p, double eps);

/// Adaptive tree: subdivides on the wavelength rule (kappa * side >= 2*pi*m_ppw),
/// the table-range rule (kappa * side > 8), and until q and f pass
/// resolution_test at eps_data; then enforces the level restriction.
QuadTree build_tree(const BoxGeom& domain, const RealField& q, const ScalarField& f,
                    const TreeParams& params);

/// Splits leaves until any two boundary-sharing leaves differ by <= 1 level.
/// Refinement only; idempotent.
void enforce_level_restriction(QuadTree& tree);

/// Manual construction: creates a root-only tree over the domain.
QuadTree make_root_tree(const BoxGeom& domain, const TreeParams& params);

/// Manual construction: splits one leaf into four children and refreshes the
/// leaf index.
void split_leaf(QuadTree& tree, std::int32_t id);

bool is_level_restricted(const QuadTree& tree);

/// Neighbor classification of a leaf. Refuses on a non-restricted tree.
NeighborLists classify_neighbors(const QuadTree& tree, std::int32_t leaf_id);

/// The p^2 grid points of a leaf, row-major (x fastest). Global unknown index
/// of point j on leaf m is m * p^2 + j.
std::vector<Point2> leaf_grid_points(const QuadTree& tree, std::int32_t leaf_id);

/// Debug dump: one line per node, "level cx cy side is_leaf leaf_index".
void dump_tree(const QuadTree& tree, std::ostream& os);

}  // namespace ls2d
