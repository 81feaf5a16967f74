#include "ls2d/quadtree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>

#include "ls2d/basis.hpp"

namespace ls2d {

namespace {

// Chebyshev first-kind nodes on [-1, 1], descending (cos form).
std::vector<double> cheb_nodes(int p) {
    std::vector<double> t(p);
    for (int i = 0; i < p; ++i) t[i] = std::cos(kPi * (2 * i + 1) / (2.0 * p));
    return t;
}

// Tensor Chebyshev interpolant of g on a box, evaluated at arbitrary points.
struct ChebInterp {
    int p;
    BoxGeom box;
    std::vector<Complex> coeff;  // c_{ab}, a + p*b

    static ChebInterp build(const BoxGeom& box, const ScalarField& g, int p) {
        ChebInterp ci;
        ci.p = p;
        ci.box = box;
        std::vector<double> t = cheb_nodes(p);
        std::vector<Complex> vals(p * p);
        const double h = box.half();
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < p; ++i)
                vals[i + p * j] = g({box.center.x + h * t[i], box.center.y + h * t[j]});
        // c_{ab} = (2/p)^2 w_a w_b sum_{ij} g_ij T_a(t_i) T_b(t_j), w_0 = 1/2
        std::vector<double> T(p * p);  // T[a + p*i] = T_a(t_i)
        for (int i = 0; i < p; ++i) {
            T[0 + p * i] = 1.0;
            if (p > 1) T[1 + p * i] = t[i];
            for (int a = 2; a < p; ++a)
                T[a + p * i] = 2.0 * t[i] * T[a - 1 + p * i] - T[a - 2 + p * i];
        }
        ci.coeff.assign(p * p, Complex(0.0));
        std::vector<Complex> partial(p * p);  // sum over i for each (a, j)
        for (int a = 0; a < p; ++a)
            for (int j = 0; j < p; ++j) {
                Complex s(0.0);
                for (int i = 0; i < p; ++i) s += vals[i + p * j] * T[a + p * i];
                partial[a + p * j] = s;
            }
        for (int a = 0; a < p; ++a)
            for (int b = 0; b < p; ++b) {
                Complex s(0.0);
                for (int j = 0; j < p; ++j) s += partial[a + p * j] * T[b + p * j];
                const double wa = a == 0 ? 0.5 : 1.0;
                const double wb = b == 0 ? 0.5 : 1.0;
                ci.coeff[a + p * b] = s * (wa * wb * 4.0 / (p * p));
            }
        return ci;
    }

    Complex eval(Point2 pt) const {
        const double xi = (pt.x - box.center.x) / box.half();
        const double eta = (pt.y - box.center.y) / box.half();
        std::vector<double> tx(p), ty(p);
        tx[0] = ty[0] = 1.0;
        if (p > 1) {
            tx[1] = xi;
            ty[1] = eta;
        }
        for (int a = 2; a < p; ++a) {
            tx[a] = 2.0 * xi * tx[a - 1] - tx[a - 2];
            ty[a] = 2.0 * eta * ty[a - 1] - ty[a - 2];
        }
        Complex s(0.0);
        for (int b = 0; b < p; ++b)
            for (int a = 0; a < p; ++a) s += coeff[a + p * b] * (tx[a] * ty[b]);
        return s;
    }
};

BoxGeom child_geom(const BoxGeom& parent, int k) {
    const double q = 0.25 * parent.side;
    const double sx = (k & 1) ? q : -q;
    const double sy = (k & 2) ? q : -q;
    return {{parent.center.x + sx, parent.center.y + sy}, 0.5 * parent.side, parent.level + 1};
}

void split_node(QuadTree& tree, std::int32_t id) {
    TreeNode& n = tree.nodes[id];  // careful: invalidated by push_back below
    BoxGeom geom = n.geom;
    std::int32_t ix = n.ix, iy = n.iy;
    std::array<std::int32_t, 4> kids{};
    for (int k = 0; k < 4; ++k) {
        TreeNode c;
        c.geom = child_geom(geom, k);
        c.parent = id;
        c.ix = 2 * ix + (k & 1);
        c.iy = 2 * iy + ((k >> 1) & 1);
        kids[k] = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.push_back(c);
    }
    tree.nodes[id].children = kids;
    tree.nodes[id].leaf_index = -1;
}

void collect_leaves(QuadTree& tree) {
    tree.leaves.clear();
    // preorder DFS, children in [ix + 2*iy] order
    std::vector<std::int32_t> stack{0};
    while (!stack.empty()) {
        std::int32_t id = stack.back();
        stack.pop_back();
        TreeNode& n = tree.nodes[id];
        if (n.is_leaf()) {
            n.leaf_index = static_cast<std::int32_t>(tree.leaves.size());
            tree.leaves.push_back(id);
        } else {
            n.leaf_index = -1;
            for (int k = 3; k >= 0; --k) stack.push_back(n.children[k]);
        }
    }
}

// integer touch test: does cell (jx, jy) at level lj touch cell (ix, iy) at
// level li, with lj >= li (jx spans a finer lattice)?
bool touches_coarser(std::int64_t jx, std::int64_t jy, int lj, std::int64_t ix, std::int64_t iy,
                     int li) {
    const int shift = lj - li;
    const std::int64_t lo_x = ix << shift, hi_x = ((ix + 1) << shift) - 1;
    const std::int64_t lo_y = iy << shift, hi_y = ((iy + 1) << shift) - 1;
    return jx >= lo_x - 1 && jx <= hi_x + 1 && jy >= lo_y - 1 && jy <= hi_y + 1;
}

}  // namespace

int QuadTree::max_depth() const {
    int d = 0;
    for (std::int32_t id : leaves) d = std::max(d, nodes[id].geom.level);
    return d;
}

std::int32_t QuadTree::find_node(int level, std::int64_t ix, std::int64_t iy) const {
    if (level < 0 || ix < 0 || iy < 0) return -1;
    const std::int64_t span = std::int64_t(1) << level;
    if (ix >= span || iy >= span) return -1;
    std::int32_t id = 0;
    for (int bit = level - 1; bit >= 0; --bit) {
        const TreeNode& n = nodes[id];
        if (n.is_leaf()) return -1;
        const int k = static_cast<int>(((ix >> bit) & 1) + 2 * ((iy >> bit) & 1));
        id = n.children[k];
    }
    return id;
}

bool resolution_test(const BoxGeom& box, const ScalarField& g, int p, double eps) {
    ChebInterp interp = ChebInterp::build(box, g, p);
    std::vector<double> t = cheb_nodes(p);
    double max_err = 0.0;
    double max_val = 0.0;
    for (int k = 0; k < 4; ++k) {
        BoxGeom c = child_geom(box, k);
        const double h = c.half();
        for (int j = 0; j < p; ++j)
            for (int i = 0; i < p; ++i) {
                Point2 pt{c.center.x + h * t[i], c.center.y + h * t[j]};
                const Complex gv = g(pt);
                max_val = std::max(max_val, std::abs(gv));
                max_err = std::max(max_err, std::abs(gv - interp.eval(pt)));
            }
    }
    return max_err <= eps * std::max(1.0, max_val);
}

QuadTree build_tree(const BoxGeom& domain, const RealField& q, const ScalarField& f,
                    const TreeParams& params) {
    if (params.p < 4 || params.p % 2 != 0) throw ConfigError("build_tree: p must be even, >= 4");
    if (!(params.eps_data > 0.0)) throw ConfigError("build_tree: eps_data must be positive");
    if (!(params.kappa > 0.0)) throw ConfigError("build_tree: kappa must be positive");
    if (!(params.m_ppw > 0.0)) throw ConfigError("build_tree: m_ppw must be positive");

    QuadTree tree;
    tree.domain = domain;
    tree.domain.level = 0;
    tree.params = params;
    TreeNode root;
    root.geom = tree.domain;
    tree.nodes.push_back(root);

    ScalarField qc = [&q](Point2 pt) { return Complex(q(pt), 0.0); };

    std::deque<std::int32_t> work{0};
    while (!work.empty()) {
        const std::int32_t id = work.front();
        work.pop_front();
        const BoxGeom geom = tree.nodes[id].geom;
        const double z = params.kappa * geom.side;
        bool split = z >= 2.0 * kPi * params.m_ppw || z > 8.0;
        if (!split)
            split = !resolution_test(geom, qc, params.p, params.eps_data) ||
                    !resolution_test(geom, f, params.p, params.eps_data);
        if (split) {
            if (geom.level >= params.max_level)
                throw NumericsError(
                    "build_tree: refinement would exceed max level " +
                    std::to_string(params.max_level) +
                    "; data not resolvable at the requested tolerance");
            split_node(tree, id);
            for (int k = 0; k < 4; ++k) work.push_back(tree.nodes[id].children[k]);
        }
    }
    collect_leaves(tree);
    enforce_level_restriction(tree);
    return tree;
}

QuadTree make_root_tree(const BoxGeom& domain, const TreeParams& params) {
    QuadTree tree;
    tree.domain = domain;
    tree.domain.level = 0;
    tree.params = params;
    TreeNode root;
    root.geom = tree.domain;
    tree.nodes.push_back(root);
    collect_leaves(tree);
    return tree;
}

void split_leaf(QuadTree& tree, std::int32_t id) {
    if (!tree.nodes[id].is_leaf()) throw ConfigError("split_leaf: node is not a leaf");
    split_node(tree, id);
    collect_leaves(tree);
}

void enforce_level_restriction(QuadTree& tree) {
    bool changed = true;
    while (changed) {
        changed = false;
        collect_leaves(tree);
        // snapshot: splitting invalidates leaf structure mid-scan
        std::vector<std::int32_t> current = tree.leaves;
        for (std::int32_t id : current) {
            const TreeNode& n = tree.nodes[id];
            if (!n.is_leaf()) continue;
            const int l = n.geom.level;
            bool violated = false;
            for (int dy = -1; dy <= 1 && !violated; ++dy)
                for (int dx = -1; dx <= 1 && !violated; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const std::int32_t nb = tree.find_node(l, n.ix + dx, n.iy + dy);
                    if (nb < 0 || tree.nodes[nb].is_leaf()) continue;
                    for (int k = 0; k < 4 && !violated; ++k) {
                        const TreeNode& ch = tree.nodes[tree.nodes[nb].children[k]];
                        if (!ch.is_leaf() &&
                            touches_coarser(ch.ix, ch.iy, l + 1, n.ix, n.iy, l))
                            violated = true;
                    }
                }
            if (violated) {
                split_node(tree, id);
                changed = true;
            }
        }
    }
    collect_leaves(tree);
}

bool is_level_restricted(const QuadTree& tree) {
    for (std::int32_t id : tree.leaves) {
        const TreeNode& n = tree.nodes[id];
        const int l = n.geom.level;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const std::int32_t nb = tree.find_node(l, n.ix + dx, n.iy + dy);
                if (nb < 0 || tree.nodes[nb].is_leaf()) continue;
                for (int k = 0; k < 4; ++k) {
                    const TreeNode& ch = tree.nodes[tree.nodes[nb].children[k]];
                    if (!ch.is_leaf() && touches_coarser(ch.ix, ch.iy, l + 1, n.ix, n.iy, l))
                        return false;
                }
            }
    }
    return true;
}

NeighborLists classify_neighbors(const QuadTree& tree, std::int32_t leaf_id) {
    const TreeNode& b = tree.nodes[leaf_id];
    if (!b.is_leaf()) throw ConfigError("classify_neighbors: node is not a leaf");
    NeighborLists out;
    const int l = b.geom.level;

    // colleagues in Fig-3 slot order (row-major, bottom-left first)
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            const std::int32_t nb = tree.find_node(l, b.ix + dx, b.iy + dy);
            if (nb < 0) continue;
            out.colleagues.push_back(nb);
            if (nb == leaf_id || tree.nodes[nb].is_leaf()) continue;
            for (int k = 0; k < 4; ++k) {
                const std::int32_t cid = tree.nodes[nb].children[k];
                const TreeNode& ch = tree.nodes[cid];
                const bool touch = touches_coarser(ch.ix, ch.iy, l + 1, b.ix, b.iy, l);
                if (touch) {
                    if (!ch.is_leaf())
                        throw NumericsError(
                            "classify_neighbors: tree is not level-restricted near leaf " +
                            std::to_string(leaf_id));
                    out.fine.push_back(cid);
                } else if (ch.is_leaf()) {
                    out.separated_fine.push_back(cid);
                }
            }
        }

    // coarse: leaves at level-1 sharing a boundary point with b
    if (l >= 1) {
        const std::int64_t px = b.ix >> 1, py = b.iy >> 1;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const std::int32_t nb = tree.find_node(l - 1, px + dx, py + dy);
                if (nb < 0 || !tree.nodes[nb].is_leaf()) continue;
                const TreeNode& c = tree.nodes[nb];
                if (touches_coarser(b.ix, b.iy, l, c.ix, c.iy, l - 1)) out.coarse.push_back(nb);
            }
    }
    return out;
}

std::vector<Point2> leaf_grid_points(const QuadTree& tree, std::int32_t leaf_id) {
    const TreeNode& n = tree.nodes[leaf_id];
    std::vector<Point2> pts = unit_grid_points(tree.params.p);
    for (Point2& pt : pts) pt = n.geom.center + n.geom.side * pt;
    return pts;
}

void dump_tree(const QuadTree& tree, std::ostream& os) {
    for (const TreeNode& n : tree.nodes) {
        os << n.geom.level << ' ' << n.geom.center.x << ' ' << n.geom.center.y << ' '
           << n.geom.side << ' ' << (n.is_leaf() ? 1 : 0) << ' ' << n.leaf_index << '\n';
    }
}

}  // namespace ls2d
