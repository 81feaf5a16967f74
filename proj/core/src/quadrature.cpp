#include "ls2d/quadrature.hpp"

#include <algorithm>
#include <array>
#include <queue>

#include "ls2d/gauss.hpp"

namespace ls2d {

namespace {

void eval_panel(const std::function<void(Point2, Complex*)>& f, int ncomp, Rect r, int order,
                std::vector<Complex>& out, std::vector<Complex>& scratch) {
    const GaussRule& g = gauss_legendre(order);
    out.assign(ncomp, Complex(0.0));
    const double cx = 0.5 * (r.lo.x + r.hi.x), hx = 0.5 * (r.hi.x - r.lo.x);
    const double cy = 0.5 * (r.lo.y + r.hi.y), hy = 0.5 * (r.hi.y - r.lo.y);
    scratch.resize(ncomp);
    for (int i = 0; i < order; ++i) {
        for (int j = 0; j < order; ++j) {
            Point2 p{cx + hx * g.x[i], cy + hy * g.x[j]};
            f(p, scratch.data());
            const double w = g.w[i] * g.w[j];
            for (int c = 0; c < ncomp; ++c) out[c] += w * scratch[c];
        }
    }
    const double scale = hx * hy;
    for (int c = 0; c < ncomp; ++c) out[c] *= scale;
}

std::array<Rect, 4> quadrants(Rect r) {
    Point2 c = r.center();
    return {Rect{r.lo, c}, Rect{{c.x, r.lo.y}, {r.hi.x, c.y}}, Rect{{r.lo.x, c.y}, {c.x, r.hi.y}},
            Rect{c, r.hi}};
}

struct Node {
    Rect rect;
    int depth = 0;
    std::vector<Complex> fine;  // sum of the four child-panel values
    std::array<std::vector<Complex>, 4> child;
    std::vector<double> est;  // per-component |coarse - fine|
    double priority = 0.0;
    long seq = 0;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.priority != b.priority) return a.priority < b.priority;
        return a.seq > b.seq;
    }
};

struct CoreResult {
    std::vector<Complex> value;
    double error = 0.0;
    long panels = 0;
};

CoreResult adaptive_core(const std::function<void(Point2, Complex*)>& f, int ncomp, Rect box,
                         double tol, const QuadOptions& opts) {
    long panels = 0;
    long seq = 0;
    std::vector<Complex> scratch;

    auto make_node = [&](Rect r, int depth, const std::vector<Complex>& coarse) {
        Node n;
        n.rect = r;
        n.depth = depth;
        n.seq = seq++;
        n.fine.assign(ncomp, Complex(0.0));
        auto qs = quadrants(r);
        for (int k = 0; k < 4; ++k) {
            eval_panel(f, ncomp, qs[k], opts.order, n.child[k], scratch);
            ++panels;
            for (int c = 0; c < ncomp; ++c) n.fine[c] += n.child[k][c];
        }
        n.est.resize(ncomp);
        n.priority = 0.0;
        for (int c = 0; c < ncomp; ++c) {
            n.est[c] = std::abs(coarse[c] - n.fine[c]);
            n.priority = std::max(n.priority, n.est[c]);
        }
        return n;
    };

    std::vector<Complex> root_coarse;
    eval_panel(f, ncomp, box, opts.order, root_coarse, scratch);
    ++panels;

    std::vector<Complex> total(ncomp);
    std::vector<double> err(ncomp);
    std::priority_queue<Node, std::vector<Node>, NodeOrder> pq;
    {
        Node root = make_node(box, 0, root_coarse);
        total = root.fine;
        err = root.est;
        pq.push(std::move(root));
    }

    auto worst_scaled = [&]() {
        double worst = 0.0;
        for (int c = 0; c < ncomp; ++c)
            worst = std::max(worst, err[c] / std::max(1.0, std::abs(total[c])));
        return worst;
    };

    while (worst_scaled() > tol) {
        if (pq.empty() || panels > opts.max_panels) {
            throw NumericsError("adaptive_quad_2d: panel budget exhausted, achieved error " +
                                std::to_string(worst_scaled()) + " vs tol " +
                                std::to_string(tol));
        }
        Node top = pq.top();
        pq.pop();
        for (int c = 0; c < ncomp; ++c) {
            total[c] -= top.fine[c];
            err[c] -= top.est[c];
        }
        auto qs = quadrants(top.rect);
        for (int k = 0; k < 4; ++k) {
            Node child = make_node(qs[k], top.depth + 1, top.child[k]);
            for (int c = 0; c < ncomp; ++c) {
                total[c] += child.fine[c];
                err[c] += child.est[c];
            }
            // panels below ~1e-13 of the box scale cannot improve in double
            if (child.depth < 44) pq.push(std::move(child));
        }
    }
    CoreResult r;
    r.value = std::move(total);
    double e = 0.0;
    for (int c = 0; c < ncomp; ++c) e = std::max(e, err[c]);
    r.error = e;
    r.panels = panels;
    return r;
}

}  // namespace

std::vector<Complex> adaptive_quad_2d_vec(const std::function<void(Point2, Complex*)>& f,
                                          int ncomp, Rect box, double tol,
                                          const QuadOptions& opts) {
    return adaptive_core(f, ncomp, box, tol, opts).value;
}

QuadResult adaptive_quad_2d(const std::function<Complex(Point2)>& f, Rect box, double tol,
                            const QuadOptions& opts) {
    auto wrapped = [&](Point2 p, Complex* out) { out[0] = f(p); };
    CoreResult core = adaptive_core(wrapped, 1, box, tol, opts);
    return {core.value[0], core.error, core.panels};
}

}  // namespace ls2d
