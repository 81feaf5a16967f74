// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Heavy runs share the build-tree table cache with the unit tests.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ls2d/driver.hpp"
#include "ls2d/hodlr.hpp"
#include "ls2d/multipole.hpp"
#include "ls2d/parallel.hpp"
#include "ls2d/reference.hpp"
#include "ls2d/system_matrix.hpp"

using namespace ls2d;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %d: %s  (%s)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

constexpr int kThreads = 2;

TableCache& cache() {
    static TableCache c(LS2D_TEST_CACHE_DIR, kThreads);
    return c;
}

RealField gaussian_q() {
    return [](Point2 x) { return 1.5 * std::exp(-160.0 * norm2(x)); };
}

ScalarField gaussian_f(double kappa) {
    return [kappa](Point2 x) {
        return -kappa * kappa * 1.5 * std::exp(-160.0 * norm2(x)) *
               std::exp(Complex(0, kappa * x.x));
    };
}

RadialProblem gaussian_radial(double kappa) {
    RadialProblem rp;
    rp.kappa = kappa;
    rp.q_r = [](double r) { return 1.5 * std::exp(-160.0 * r * r); };
    rp.support_radius = 0.55;
    return rp;
}

// ---------------------------------------------------------------------------
// criterion 1: entry/oracle equivalence on an adaptive kappa = 20 tree

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    const double kappa = 20.0;
    QuadTree tree = build_tree({{0, 0}, 4.0, 0}, gaussian_q(), gaussian_f(kappa),
                               TreeParams{4, 0.5, 1e-5, kappa, 30});
    InterpOperator interp = build_interp(4);
    EntryParams ep;
    ep.nthreads = kThreads;
    EntryContext ctx(tree, interp, cache(), gaussian_q(), gaussian_f(kappa), ep);
    const long n = ctx.size();

    // stratified pair sample: 200 per kind
    std::map<EntryKind, std::vector<std::pair<long, long>>> buckets;
    std::mt19937_64 rng(424242);
    std::uniform_int_distribution<long> ui(0, n - 1);
    long guard = 0;
    const int per_kind = 200;
    while (++guard < 30000000) {
        const long i = ui(rng), j = ui(rng);
        EntryKind k = ctx.classify_pair(i, j);
        auto& v = buckets[k];
        if (static_cast<int>(v.size()) < per_kind) v.push_back({i, j});
        if (buckets.size() == 5) {
            bool full = true;
            for (auto& [kk, vv] : buckets) full = full && static_cast<int>(vv.size()) >= per_kind;
            if (full) break;
        }
    }
    bool covered = buckets.size() == 5;
    int total_pairs = 0;
    for (auto& [k, v] : buckets) {
        covered = covered && static_cast<int>(v.size()) >= 50;
        total_pairs += static_cast<int>(v.size());
    }

    std::vector<std::pair<long, long>> all;
    for (auto& [k, v] : buckets)
        for (auto pr : v) all.push_back(pr);
    std::vector<double> devs(all.size(), 0.0), fardevs(all.size(), 0.0);
    parallel_for(static_cast<long>(all.size()), kThreads, [&](long idx) {
        const auto [i, j] = all[idx];
        const Complex oracle_v = reference_entry(tree, interp, i, j);
        const double k2q = kappa * kappa * ctx.q_values()[i];
        const Complex oracle_a = (i == j ? 1.0 : 0.0) + k2q * oracle_v;
        const Complex got = ctx.a_entry(i, j);
        devs[idx] = std::abs(got - oracle_a) / std::max(1.0, std::abs(oracle_a));
        if (ctx.classify_pair(i, j) == EntryKind::Far) fardevs[idx] = devs[idx];
    });
    double worst_all = 0.0, worst_far = 0.0;
    for (std::size_t idx = 0; idx < all.size(); ++idx) {
        worst_all = std::max(worst_all, devs[idx]);
        worst_far = std::max(worst_far, fardevs[idx]);
    }
    const double dt = seconds_since(t0);
    const bool pass =
        covered && worst_all <= 1e-9 && worst_far <= 1e-12 && dt <= 600.0 && n > 8000;
    report(1, pass, "entry-oracle equivalence, all five kinds",
           fmt("N=%ld pairs=%d worst=%.2e worst_far=%.2e kinds=%zu t=%.0fs", n, total_pairs,
               worst_all, worst_far, buckets.size(), dt));
}

// ---------------------------------------------------------------------------
// criteria 2, 6, 7, 8 share the uniform gaussian ladder on side 3.125

struct LadderRun {
    long n = 0;
    double err_interior = 0.0, err_exterior = 0.0;
    double t_factor = 0.0, t_solve = 0.0;
};

LadderRun run_gaussian(double kappa, int uniform_depth, double eps_data, double eps_h,
                       const std::vector<Point2>& eval, const std::vector<Complex>& ref) {
    ProblemSpec spec;
    spec.id = ProblemId::Gaussian;
    spec.domain = {{0.0, 0.0}, 3.125, 0};
    spec.kappa = kappa;
    spec.uniform_depth = uniform_depth;
    spec.eps_data = eps_data > 0.0 ? eps_data : 1e-8;
    spec.m_ppw = 1.3;  // adaptive runs: bulk kappa L < 8.17
    spec.eps_h = eps_h;
    spec.solver = SolverKind::Hodlr;
    spec.table_cache = LS2D_TEST_CACHE_DIR;
    spec.nthreads = kThreads;
    spec.eval_points = eval;
    SolutionBundle b = run(spec);
    LadderRun out;
    out.n = b.n;
    out.err_interior = std::abs(b.eval_u[0] - ref[0]);
    out.err_exterior = std::abs(b.eval_u[1] - ref[1]);
    out.t_factor = b.timings.factor;
    out.t_solve = b.timings.solve;
    return out;
}

void criteria_2_6_7_8() {
    const std::vector<Point2> eval{{0.5, 0.0}, {1.0, 0.5}};
    const auto t0 = std::chrono::steady_clock::now();

    // criterion 2: uniform ladder at kappa = 40
    std::vector<Complex> ref40 = radial_reference(gaussian_radial(40.0), eval);
    std::vector<LadderRun> ladder;
    for (int depth : {4, 5, 6})
        ladder.push_back(run_gaussian(40.0, depth, 0.0, 1e-8, eval, ref40));
    const double r1 = ladder[0].err_interior / ladder[1].err_interior;
    const double r2 = ladder[1].err_interior / ladder[2].err_interior;
    const double r1e = ladder[0].err_exterior / ladder[1].err_exterior;
    const double r2e = ladder[1].err_exterior / ladder[2].err_exterior;
    // Table-style magnitudes scale by (3.125/4)^4 = 0.373 if the reference
    // values used side 4; the acceptance band is a decade either way
    const double table_vals[3] = {1.09e-2, 3.12e-4, 1.43e-5};
    bool in_band = true;
    for (int k = 0; k < 3; ++k) {
        const double ratio = ladder[k].err_interior / table_vals[k];
        in_band = in_band && ratio >= 0.1 && ratio <= 10.0;
    }
    const double dt2 = seconds_since(t0);
    const bool pass2 = r1 >= 12.0 && r2 >= 12.0 && r1e >= 12.0 && r2e >= 12.0 && in_band &&
                       dt2 <= 3600.0;
    report(2, pass2, "fourth-order uniform convergence vs radial reference",
           fmt("err_int={%.2e,%.2e,%.2e} ratios={%.1f,%.1f} ext_ratios={%.1f,%.1f} band=%d "
               "t=%.0fs",
               ladder[0].err_interior, ladder[1].err_interior, ladder[2].err_interior, r1, r2,
               r1e, r2e, static_cast<int>(in_band), dt2));

    // criterion 6: factor+solve scaling slope over the same ladder
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const LadderRun& r : ladder) {
            const double lx = std::log(static_cast<double>(r.n));
            const double ly = std::log(std::max(r.t_factor + r.t_solve, 1e-3));
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        const double slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);
        report(6, slope <= 1.7, "factor+solve scaling slope <= 1.7",
               fmt("times={%.1f,%.1f,%.1f}s slope=%.2f", ladder[0].t_factor + ladder[0].t_solve,
                   ladder[1].t_factor + ladder[1].t_solve,
                   ladder[2].t_factor + ladder[2].t_solve, slope));
    }

    // criterion 7: adaptive advantage at the uniform-65536 error level
    {
        const double target_err = ladder[2].err_interior;
        long best_n = -1;
        double best_err = 0.0;
        for (double eps : {1.2e-2, 6e-3, 3e-3, 1.5e-3}) {
            LadderRun a = run_gaussian(40.0, -1, eps, 1e-8, eval, ref40);
            std::printf("    adaptive eps=%.1e: N=%ld err=%.2e\n", eps, a.n, a.err_interior);
            std::fflush(stdout);
            if (a.err_interior <= target_err && (best_n < 0 || a.n < best_n)) {
                best_n = a.n;
                best_err = a.err_interior;
            }
        }
        const bool pass7 = best_n > 0 && best_n <= ladder[2].n / 4;
        report(7, pass7, "adaptive N <= uniform N / 4 at matched error",
               fmt("uniform N=%ld err=%.2e; adaptive N=%ld err=%.2e", ladder[2].n, target_err,
                   best_n, best_err));
    }

    // criterion 8: error growth across kappa at fixed kappa * L_B
    {
        std::vector<Complex> ref10 = radial_reference(gaussian_radial(10.0), eval);
        std::vector<Complex> ref20 = radial_reference(gaussian_radial(20.0), eval);
        LadderRun k10 = run_gaussian(10.0, 4, 0.0, 1e-8, eval, ref10);
        LadderRun k20 = run_gaussian(20.0, 5, 0.0, 1e-8, eval, ref20);
        const double growth = ladder[2].err_interior / std::max(k10.err_interior, 1e-300);
        const bool pass8 = growth <= 3.0;
        report(8, pass8, "dispersion robustness: error growth <= 3x for kappa 10 -> 40",
               fmt("err(k=10)=%.2e err(k=20)=%.2e err(k=40)=%.2e growth=%.2f", k10.err_interior,
                   k20.err_interior, ladder[2].err_interior, growth));
    }
}

// ---------------------------------------------------------------------------
// criterion 3: near tables vs brute quadrature across relations and regimes

void criterion_3() {
    const BasisSpec basis = make_basis(4);
    const auto grid = unit_grid_points(4);
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> ulow(0.2, 4.0), uhigh(4.0001, 8.0);
    double worst_low = 0.0, worst_high = 0.0;

    auto sample = [&](NearRelation rel, bool split, int count, bool low_range) {
        auto tab = cache().get(rel, 4, 60, split);
        std::uniform_int_distribution<int> uslot(0, tab->n_slots - 1), ug(0, 15),
            ul(0, basis.n_basis - 1);
        double worst = 0.0;
        for (int k = 0; k < count; ++k) {
            const double z = low_range ? (k == 0 ? 4.0 : ulow(rng)) : uhigh(rng);
            const int slot = uslot(rng), g = ug(rng), l = ul(rng);
            const Complex got = near_entry_total(*tab, slot, g, l, z, 1.0);
            const NearSlot& s = near_slots(rel)[slot];
            const Point2 t = s.center + s.side * grid[g];
            const Complex oracle =
                Complex(0.0, 0.25) * kernel_basis_integral(basis, l + 1, t, z);
            worst = std::max(worst, std::abs(got - oracle) / std::abs(oracle));
        }
        return worst;
    };

    for (NearRelation rel :
         {NearRelation::Colleague, NearRelation::Coarse, NearRelation::Fine})
        worst_low = std::max(worst_low, sample(rel, false, 200, true));
    // 4 < kappa L <= 8 goes through the child-split tables (coarse neighbors
    // cannot occur there: their parent box would exceed the table range)
    for (NearRelation rel : {NearRelation::Colleague, NearRelation::Fine})
        worst_high = std::max(worst_high, sample(rel, true, 200, false));

    const bool pass = worst_low <= 1e-12 && worst_high <= 1e-10;
    report(3, pass, "near tables match brute quadrature",
           fmt("worst(kL<=4)=%.2e worst(child-split, 4<kL<=8)=%.2e", worst_low, worst_high));
}

// ---------------------------------------------------------------------------
// criterion 4: multipole truncation accuracy and trend

void criterion_4() {
    InterpOperator interp = build_interp(4);
    const double side = 1.0, kappa = 4.0;
    const Point2 trel{1.5 * side, 0.4 * side};
    HankelWorkspace ws;
    double worst45 = 0.0;
    FarFieldMoments fm45 = build_far_moments(kappa, side, 45, interp, kThreads);
    std::vector<Complex> oracles(interp.spec.n_basis);
    for (int l = 0; l < interp.spec.n_basis; ++l) {
        oracles[l] = Complex(0.0, 0.25) * side * side *
                     kernel_basis_integral(interp.spec, l + 1, trel, kappa * side);
        const Complex got = eval_multipole(fm45.C.col(l), kappa, trel, side, ws);
        worst45 = std::max(worst45, std::abs(got - oracles[l]) / std::abs(oracles[l]));
    }
    double errs[3];
    int idx = 0;
    for (int L : {10, 20, 30}) {
        FarFieldMoments fm = build_far_moments(kappa, side, L, interp, kThreads);
        errs[idx++] = std::abs(eval_multipole(fm.C.col(0), kappa, trel, side, ws) - oracles[0]);
    }
    const double slope =
        0.5 * (std::log2(errs[1] / errs[0]) / 10.0 + std::log2(errs[2] / errs[1]) / 10.0);
    const bool pass = worst45 <= 1e-12 && slope <= -0.7 && slope >= -1.3;
    report(4, pass, "multipole truncation: 1e-12 at L=45, ~2^-L trend",
           fmt("worst(L=45)=%.2e errs(L=10,20,30)={%.1e,%.1e,%.1e} slope=%.2f", worst45, errs[0],
               errs[1], errs[2], slope));
}

// ---------------------------------------------------------------------------
// criterion 5: HODLR vs dense at N = 4096

void criterion_5() {
    const auto t0 = std::chrono::steady_clock::now();
    const double kappa = 20.0;
    BoxGeom domain{{0.0, 0.0}, 3.0, 0};
    RealField q = gaussian_q();
    ScalarField f = gaussian_f(kappa);
    // uniform depth 4: N = 4096, kappa L = 3.75
    QuadTree tree = build_tree(domain, q, f, TreeParams{4, 0.7, 1e30, kappa, 30});
    InterpOperator interp = build_interp(4);
    EntryParams ep;
    ep.nthreads = kThreads;
    EntryContext ctx(tree, interp, cache(), q, f, ep);
    if (ctx.size() != 4096) {
        report(5, false, "HODLR vs dense", fmt("unexpected N=%ld", ctx.size()));
        return;
    }
    EntryFn a = [&](long r, long c) { return ctx.a_entry(r, c); };
    Eigen::VectorXcd rhs(ctx.size());
    for (long i = 0; i < ctx.size(); ++i) rhs(i) = ctx.f_values()[i];

    Ordering ord = build_ordering(tree, 128);
    HodlrFactor factor = hodlr_factor(a, ord, 1e-10, 1000, kThreads);
    Eigen::VectorXcd xh = hodlr_solve(factor, ord, rhs);
    Eigen::VectorXcd xd = dense_solve(a, ctx.size(), rhs, kThreads);
    const double rel = (xh - xd).norm() / xd.norm();
    const double resid = sampled_row_residual(a, ctx.size(), xh, rhs, 200, 4242, kThreads);
    const double dt = seconds_since(t0);
    const bool pass = rel <= 1e-8 && resid <= 1e-8 && dt <= 300.0;
    report(5, pass, "HODLR matches dense at eps_h = 1e-10",
           fmt("N=4096 rel_diff=%.2e residual=%.2e max_rank=%d t=%.0fs", rel, resid,
               factor.stats().max_rank, dt));
}

// ---------------------------------------------------------------------------
// criterion 9: the standing property suites, re-run in brief form

void criterion_9() {
    bool all = true;
    std::string detail;

    {
        std::mt19937_64 rng(5150);
        bool ok = true;
        for (int trial = 0; trial < 25; ++trial) {
            QuadTree t = make_root_tree({{0, 0}, 2.0, 0}, TreeParams{});
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (int round = 0; round < 30; ++round) {
                const std::int32_t id =
                    t.leaves[static_cast<std::size_t>(u(rng) * t.n_leaves())];
                if (t.node(id).geom.level < 6) split_leaf(t, id);
            }
            enforce_level_restriction(t);
            ok = ok && is_level_restricted(t);
        }
        all = all && ok;
        detail += fmt("restriction=%d ", static_cast<int>(ok));
    }
    {
        const double kappa = 10.0;
        auto q = [](Point2 x) { return 1.5 * std::exp(-40.0 * norm2(x)); };
        ScalarField f = [&](Point2 x) {
            return -kappa * kappa * q(x) * std::exp(Complex(0, kappa * x.x));
        };
        QuadTree t = build_tree({{0, 0}, 4.0, 0}, q, f, TreeParams{4, 0.5, 1e-3, kappa, 30});
        bool ok = true;
        for (std::int32_t a : t.leaves) {
            NeighborLists nl = classify_neighbors(t, a);
            ok = ok && nl.colleagues.size() <= 9 && nl.coarse.size() <= 12 &&
                 nl.fine.size() <= 12 && nl.separated_fine.size() <= 20;
            for (std::int32_t fid : nl.fine) {
                NeighborLists fl = classify_neighbors(t, fid);
                ok = ok && std::count(fl.coarse.begin(), fl.coarse.end(), a) == 1;
            }
        }
        all = all && ok;
        detail += fmt("partition=%d ", static_cast<int>(ok));
    }
    {
        InterpOperator op = build_interp(4);
        const double dev =
            (op.Qdag * op.Q - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff();
        all = all && dev < 1e-12;
        detail += fmt("QdagQ=%.1e ", dev);
    }
    {
        double worst = 0.0;
        for (double x : {0.3, 3.0, 42.0, 800.0})
            for (int n : {0, 3, 17, 50}) {
                const double w =
                    bessel_j(n + 1, x) * bessel_y(n, x) - bessel_j(n, x) * bessel_y(n + 1, x);
                worst = std::max(worst, std::abs(w * kPi * x / 2.0 - 1.0));
            }
        all = all && worst < 1e-12;
        detail += fmt("wronskian=%.1e ", worst);
    }
    {
        double worst = 0.0;
        for (double z : {1.0, 4.0, 8.0}) {
            HankelSeriesCoeffs sc = series_coeffs(z, 60);
            for (double r : {0.25, 0.9}) {
                if (z * r > 8.0) continue;
                Complex s(0.0);
                double pw = 1.0;
                const double lg = std::log(0.5 * r);
                for (int m = 0; m <= 60; ++m) {
                    s += sc.c[m] * pw + sc.d[m] * (pw * lg);
                    pw *= 0.25 * r * r;
                }
                worst = std::max(worst, std::abs(s - hankel1(0, z * r)));
            }
        }
        all = all && worst < 1e-13;
        detail += fmt("series=%.1e ", worst);
    }
    {
        const double kappa = 4.0;
        auto qf = [](Point2 x) { return std::exp(-8.0 * norm2(x)); };
        RealField q = qf;
        ScalarField f = make_rhs(kappa, q);
        QuadTree tree = build_tree({{0, 0}, 2.0, 0}, q, f, TreeParams{4, 0.5, 1e-3, kappa, 30});
        InterpOperator interp = build_interp(4);
        EntryContext ctx(tree, interp, cache(), q, f);
        EntryFn a = [&](long r, long c) { return ctx.a_entry(r, c); };
        Eigen::VectorXcd rhs(ctx.size());
        for (long i = 0; i < ctx.size(); ++i) rhs(i) = ctx.f_values()[i];
        Eigen::VectorXcd x1 = dense_solve(a, ctx.size(), rhs);
        Eigen::VectorXcd x2 = dense_solve(a, ctx.size(), Eigen::VectorXcd(2.0 * rhs));
        const double lin = (x2 - 2.0 * x1).norm() / x1.norm();
        all = all && lin < 1e-12;
        detail += fmt("linearity=%.1e ", lin);

        ProblemSpec z;
        z.id = ProblemId::Custom;
        z.custom_q = [](Point2) { return 0.0; };
        z.domain = {{0.0, 0.0}, 2.0, 0};
        z.kappa = kappa;
        z.eps_data = 1e-3;
        z.solver = SolverKind::Dense;
        z.table_cache = LS2D_TEST_CACHE_DIR;
        z.nthreads = kThreads;
        z.eval_points = {{0.3, 0.3}};
        SolutionBundle zb = run(z);
        bool idok = zb.residual == 0.0;
        for (Complex p : zb.psi) idok = idok && std::abs(p) == 0.0;
        all = all && idok;
        detail += fmt("identity=%d", static_cast<int>(idok));
    }
    report(9, all, "standing property suites", detail);
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_1();
    criterion_3();
    criterion_4();
    criterion_5();
    criteria_2_6_7_8();
    criterion_9();
    std::printf("acceptance: %d failure(s), total %.0fs\n", g_failures, seconds_since(t0));
    return g_failures;
}
