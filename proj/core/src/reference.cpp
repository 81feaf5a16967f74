#include "ls2d/reference.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <map>

#include "ls2d/dd.hpp"
#include "ls2d/gauss.hpp"
#include "ls2d/special_functions.hpp"

namespace ls2d {

namespace {

double rect_dist(const Rect& r, Point2 t) {
    const double dx = std::max({r.lo.x - t.x, t.x - r.hi.x, 0.0});
    const double dy = std::max({r.lo.y - t.y, t.y - r.hi.y, 0.0});
    return std::hypot(dx, dy);
}

// Graded panels: refined toward the kernel singularity and until each panel
// spans at most ~2 radians of kernel phase. Deliberately a different
// partitioning strategy from the table generator (oracle independence).
std::vector<Rect> kernel_panels(Point2 t, double z) {
    std::vector<Rect> out;
    std::vector<Rect> stack{Rect{{-0.5, -0.5}, {0.5, 0.5}}};
    const double min_size = 1e-11;
    while (!stack.empty()) {
        Rect r = stack.back();
        stack.pop_back();
        const double d = rect_dist(r, t);
        const double diam = std::hypot(r.width(), r.height());
        const bool sing_ok = diam <= 0.6 * d;
        const bool phase_ok = z * diam <= 2.0;
        if ((sing_ok && phase_ok) || std::max(r.width(), r.height()) <= min_size) {
            out.push_back(r);
            continue;
        }
        if (r.width() >= r.height()) {
            const double cx = 0.5 * (r.lo.x + r.hi.x);
            stack.push_back({{r.lo.x, r.lo.y}, {cx, r.hi.y}});
            stack.push_back({{cx, r.lo.y}, {r.hi.x, r.hi.y}});
        } else {
            const double cy = 0.5 * (r.lo.y + r.hi.y);
            stack.push_back({{r.lo.x, r.lo.y}, {r.hi.x, cy}});
            stack.push_back({{r.lo.x, cy}, {r.hi.x, r.hi.y}});
        }
    }
    return out;
}

}  // namespace

Complex kernel_basis_integral(const BasisSpec& basis, int l, Point2 target, double z) {
    const GaussRule& g = gauss_legendre(24);
    CDD acc;
    for (const Rect& panel : kernel_panels(target, z)) {
        const double cx = 0.5 * (panel.lo.x + panel.hi.x), hx = 0.5 * panel.width();
        const double cy = 0.5 * (panel.lo.y + panel.hi.y), hy = 0.5 * panel.height();
        const double jac = hx * hy;
        for (std::size_t i = 0; i < g.x.size(); ++i)
            for (std::size_t j = 0; j < g.x.size(); ++j) {
                const Point2 u{cx + hx * g.x[i], cy + hy * g.x[j]};
                const double r = dist(target, u);
                if (r == 0.0) continue;
                const Complex v =
                    hankel1(0, z * r) * (basis_eval(basis, l, u.x, u.y) * g.w[i] * g.w[j] * jac);
                acc.re += DD(v.real());
                acc.im += DD(v.imag());
            }
    }
    return acc.to_complex();
}

Complex reference_entry(const QuadTree& tree, const InterpOperator& interp, long i, long j,
                        double tol) {
    if (tol < 1e-13) throw ConfigError("reference_entry: tol below the 1e-13 floor");
    const int p2 = tree.params.p * tree.params.p;
    const TreeNode& b = tree.node(tree.leaves[j / p2]);
    const TreeNode& tleaf = tree.node(tree.leaves[i / p2]);
    const std::vector<Point2> unit = unit_grid_points(tree.params.p);
    const Point2 x = tleaf.geom.center + tleaf.geom.side * unit[i % p2];
    const Point2 t_rel = (1.0 / b.geom.side) * (x - b.geom.center);
    const double z = tree.params.kappa * b.geom.side;

    const int nb = interp.spec.n_basis;
    Complex v(0.0);
    for (int l = 0; l < nb; ++l) {
        const Complex integral = kernel_basis_integral(interp.spec, l + 1, t_rel, z);
        v += interp.Qdag(l, j % p2) * integral;
    }
    const double pref = b.geom.side * b.geom.side;
    return kEntryPrefactor * pref * v;  // entry-layer kernel -(i/4) H0
}

namespace {

struct ModeSolution {
    Complex alpha;  // total field inside: alpha (r/R)^n v_n(r)
    Complex beta;   // scattered outside: beta H_n(kappa r)
    std::map<double, double> v_at;  // interior radii -> v_n
};

// radial factor v_n with w = r^n v: v'' + (2n+1)/r v' + kappa^2 (1+q) v = 0
ModeSolution solve_mode(const RadialProblem& prob, int n, const std::vector<double>& radii) {
    namespace ode = boost::numeric::odeint;
    using State = std::array<double, 2>;

    const double R = prob.support_radius;
    const double k = prob.kappa;
    auto sys = [&](const State& s, State& ds, double r) {
        ds[0] = s[1];
        ds[1] = -(2.0 * n + 1.0) / r * s[1] - k * k * (1.0 + prob.q_r(r)) * s[0];
    };

    const double r0 = 1e-7 * R;
    const double c2 = -k * k * (1.0 + prob.q_r(0.0)) / (4.0 * (n + 1.0));
    State s{1.0 + c2 * r0 * r0, 2.0 * c2 * r0};

    auto stepper = ode::make_controlled(prob.ode_tol, prob.ode_tol,
                                        ode::runge_kutta_fehlberg78<State>());
    ModeSolution mode;
    double r = r0;
    for (double stop : radii) {
        if (stop <= r || stop > R) continue;
        ode::integrate_adaptive(stepper, sys, s, r, stop, 0.25 * (stop - r));
        r = stop;
        mode.v_at[stop] = s[0];
    }
    if (r < R) {
        ode::integrate_adaptive(stepper, sys, s, r, R, 0.25 * (R - r));
        r = R;
    }

    // match alpha v(R) = i^n J_n(kR) + beta H_n(kR) and the derivative
    // (the R^n scale of w is absorbed into alpha)
    const double x = k * R;
    const double jn = bessel_j(n, x);
    const double jn1 = bessel_j(n - 1, x);
    const Complex hn = hankel1(n, x);
    const Complex hn1 = hankel1(n - 1, x);
    const double djn = k * (jn1 - n / x * jn);
    const Complex dhn = k * (hn1 - n / x * hn);

    const Complex in = std::pow(Complex(0.0, 1.0), n);
    const double wv = s[0];
    const double wd = s[1] + n / R * s[0];
    // [wv, -hn; wd, -dhn] [alpha, beta]^T = i^n [jn, djn]^T
    const Complex det = -wv * dhn + hn * wd;
    if (std::abs(det) < 1e-12 * (std::abs(wv * dhn) + std::abs(hn * wd)))
        throw NumericsError("radial_reference: ill-conditioned matching system");
    mode.alpha = in * (-jn * dhn + hn * djn) / det;
    mode.beta = in * (wv * djn - jn * wd) / det;
    return mode;
}

}  // namespace

std::vector<Complex> radial_reference(const RadialProblem& problem,
                                      const std::vector<Point2>& targets) {
    const double R = problem.support_radius;
    const double k = problem.kappa;
    int nmax = problem.n_modes > 0
                   ? problem.n_modes
                   : static_cast<int>(k * R + 50.0);

    std::vector<double> radii;
    for (Point2 t : targets)
        if (norm(t) <= R) radii.push_back(std::max(norm(t), 1e-6 * R));
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

    std::vector<Complex> u(targets.size(), Complex(0.0));
    // incident field added in closed form for exterior targets
    for (std::size_t ti = 0; ti < targets.size(); ++ti)
        if (norm(targets[ti]) > R)
            u[ti] = std::exp(Complex(0.0, k * targets[ti].x));

    double running_max = 0.0;
    int quiet = 0;
    for (int n = 0; n <= nmax; ++n) {
        const ModeSolution mode = solve_mode(problem, n, radii);
        double biggest = 0.0;
        for (std::size_t ti = 0; ti < targets.size(); ++ti) {
            const Point2 t = targets[ti];
            const double r = norm(t);
            const double theta = std::atan2(t.y, t.x);
            const double weight_cos = n == 0 ? 1.0 : 2.0 * std::cos(n * theta);
            Complex term;
            if (r > R) {
                term = mode.beta * hankel1(n, k * r) * weight_cos;
            } else {
                const double rr = std::max(r, 1e-6 * R);
                const double scale =
                    n == 0 ? 1.0 : std::exp(n * std::log(rr / R));  // (r/R)^n
                const double v = mode.v_at.at(rr);
                term = mode.alpha * (scale * v) * weight_cos;
            }
            u[ti] += term;
            biggest = std::max(biggest, std::abs(term));
        }
        running_max = std::max(running_max, biggest);
        if (n > static_cast<int>(k * R) && biggest < 1e-15 * std::max(1.0, running_max)) {
            if (++quiet >= 3) break;
        } else {
            quiet = 0;
        }
    }
    return u;
}

}  // namespace ls2d
