#include "ls2d/driver.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "ls2d/reference.hpp"
#include "ls2d/system_matrix.hpp"

namespace ls2d {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

TreeParams tree_params(const ProblemSpec& spec) {
    TreeParams tp;
    tp.p = spec.p;
    tp.kappa = spec.kappa;
    tp.max_level = spec.max_level;
    if (spec.uniform_depth >= 0) {
        // force exactly uniform_depth levels: the wavelength rule alone
        // triggers through depth-1 and stops at depth
        tp.eps_data = 1e30;
        tp.m_ppw = spec.kappa * spec.domain.side /
                   (std::pow(2.0, spec.uniform_depth) * 2.0 * kPi) * 1.0000001;
    } else {
        tp.eps_data = spec.eps_data;
        tp.m_ppw = spec.m_ppw;
    }
    return tp;
}

}  // namespace

SolutionBundle run(const ProblemSpec& spec) {
    SolutionBundle out;
    const double kappa = spec.kappa;
    RealField q = make_contrast(spec);
    ScalarField f = make_rhs(kappa, q);

    auto t0 = std::chrono::steady_clock::now();
    QuadTree tree;
    try {
        tree = build_tree(spec.domain, q, f, tree_params(spec));
    } catch (const NumericsError& e) {
        throw NumericsError(std::string("tree stage: ") + e.what());
    }
    out.timings.tree = seconds_since(t0);
    out.m_leaves = tree.n_leaves();
    out.max_level = tree.max_depth();

    t0 = std::chrono::steady_clock::now();
    InterpOperator interp = build_interp(spec.p);
    TableCache tables(spec.table_cache, spec.nthreads);
    EntryParams ep;
    ep.L = spec.L;
    ep.pmax = spec.pmax;
    ep.nthreads = spec.nthreads;
    EntryContext ctx(tree, interp, tables, q, f, ep);
    out.timings.context = seconds_since(t0);
    out.n = ctx.size();

    EntryFn a = [&ctx](long r, long c) { return ctx.a_entry(r, c); };
    Eigen::VectorXcd rhs(out.n);
    for (long i = 0; i < out.n; ++i) rhs(i) = ctx.f_values()[i];

    const double eps_h = spec.eps_h > 0.0 ? spec.eps_h : spec.eps_data * 1e-4;
    Eigen::VectorXcd psi;
    t0 = std::chrono::steady_clock::now();
    if (spec.solver == SolverKind::Hodlr) {
        Ordering ord = build_ordering(tree, spec.n_leaf);
        HodlrFactor factor = hodlr_factor(a, ord, eps_h, 1000, spec.nthreads);
        out.hodlr = factor.stats();
        out.timings.factor = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        psi = hodlr_solve(factor, ord, rhs);
        out.timings.solve = seconds_since(t0);
    } else {
        psi = dense_solve(a, out.n, rhs, spec.nthreads);
        out.timings.factor = seconds_since(t0);
    }

    t0 = std::chrono::steady_clock::now();
    out.residual = sampled_row_residual(a, out.n, psi, rhs, 200, 0x12345678u, spec.nthreads);
    out.psi.assign(psi.data(), psi.data() + out.n);

    out.eval_points = spec.eval_points;
    if (!out.eval_points.empty()) {
        out.eval_uscat = ctx.apply_volume(out.psi, out.eval_points);
        out.eval_u.resize(out.eval_points.size());
        for (std::size_t k = 0; k < out.eval_points.size(); ++k)
            out.eval_u[k] = incident_wave(kappa, out.eval_points[k]) + out.eval_uscat[k];
    }
    if (spec.grid_nx > 0 && spec.grid_ny > 0) {
        out.grid_nx = spec.grid_nx;
        out.grid_ny = spec.grid_ny;
        const Point2 lo = spec.domain.lo();
        const double side = spec.domain.side;
        out.grid_points.reserve(static_cast<std::size_t>(spec.grid_nx) * spec.grid_ny);
        for (int jy = 0; jy < spec.grid_ny; ++jy)
            for (int ix = 0; ix < spec.grid_nx; ++ix) {
                const double fx = spec.grid_nx > 1 ? double(ix) / (spec.grid_nx - 1) : 0.5;
                const double fy = spec.grid_ny > 1 ? double(jy) / (spec.grid_ny - 1) : 0.5;
                out.grid_points.push_back({lo.x + fx * side, lo.y + fy * side});
            }
        out.grid_uscat = ctx.apply_volume(out.psi, out.grid_points, 1e-9);
        out.grid_u.resize(out.grid_points.size());
        for (std::size_t k = 0; k < out.grid_points.size(); ++k)
            out.grid_u[k] = incident_wave(kappa, out.grid_points[k]) + out.grid_uscat[k];
    }
    out.timings.post = seconds_since(t0);

    if (!spec.out_path.empty() && !out.grid_points.empty()) emit_field_csv(out, spec.out_path);
    return out;
}

StudyReport convergence_study(const ProblemSpec& spec, const StudyLadder& ladder) {
    if (spec.eval_points.empty())
        throw ConfigError("convergence_study: eval points are required");
    StudyReport report;
    const bool uniform = !ladder.uniform_n.empty();
    std::vector<ProblemSpec> rungs;
    if (uniform) {
        for (long n : ladder.uniform_n) {
            ProblemSpec s = spec;
            const double leaves = static_cast<double>(n) / (spec.p * spec.p);
            const int depth = static_cast<int>(std::lround(std::log2(leaves) / 2.0));
            if (static_cast<long>(std::lround(std::pow(4.0, depth))) * spec.p * spec.p != n)
                throw ConfigError("convergence_study: N must be p^2 * 4^depth");
            s.uniform_depth = depth;
            rungs.push_back(s);
        }
    } else {
        for (double e : ladder.eps_values) {
            ProblemSpec s = spec;
            s.eps_data = e;
            s.eps_h = spec.eps_h > 0.0 ? spec.eps_h : e * 1e-4;
            rungs.push_back(s);
        }
    }

    for (std::size_t k = 0; k < rungs.size(); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        SolutionBundle b = run(rungs[k]);
        StudyRow row;
        row.label = uniform ? "N=" + std::to_string(b.n)
                            : "eps=" + std::to_string(rungs[k].eps_data);
        row.n = b.n;
        row.time_factor = b.timings.factor;
        row.time_solve = b.timings.solve;
        row.time_total = seconds_since(t0);
        row.values = b.eval_u;
        report.rows.push_back(std::move(row));
    }

    // reference values at the eval points
    std::vector<Complex> ref;
    if (spec.id == ProblemId::Gaussian || spec.id == ProblemId::FlatBump) {
        report.radial_reference_used = true;
        RadialProblem rp;
        rp.kappa = spec.kappa;
        if (spec.id == ProblemId::Gaussian) {
            rp.q_r = [](double r) { return 1.5 * std::exp(-160.0 * r * r); };
            rp.support_radius = 0.55;
        } else {
            rp.q_r = [](double r) { return 0.5 * erfc(5.0 * (r * r - 1.0)); };
            rp.support_radius = 1.55;
        }
        ref = radial_reference(rp, spec.eval_points);
    } else if (report.rows.size() >= 2) {
        // Richardson extrapolation from the two finest rungs (4:1 dyadic)
        const auto& uf = report.rows.back().values;
        const auto& uc = report.rows[report.rows.size() - 2].values;
        ref.resize(uf.size());
        for (std::size_t i = 0; i < uf.size(); ++i)
            ref[i] = uf[i] + (uf[i] - uc[i]) / 15.0;
    }
    if (!ref.empty()) {
        for (StudyRow& row : report.rows) {
            row.errors.resize(ref.size());
            for (std::size_t i = 0; i < ref.size(); ++i)
                row.errors[i] = std::abs(row.values[i] - ref[i]);
        }
    }

    // estimated order: least-squares slope of log(err) vs log(h), h = N^{-1/2}
    if (report.rows.size() >= 2 && !report.rows.front().errors.empty()) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (const StudyRow& row : report.rows) {
            const double err = *std::max_element(row.errors.begin(), row.errors.end());
            if (err <= 0.0) continue;
            const double lx = -0.5 * std::log(static_cast<double>(row.n));
            const double ly = std::log(err);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++cnt;
        }
        if (cnt >= 2) report.estimated_order = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    }

    if (!spec.out_path.empty()) write_study_csv(report, spec.out_path);
    return report;
}

void emit_field_csv(const SolutionBundle& bundle, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("emit_field_csv: cannot open " + path);
    os << "x,y,re_u,im_u,re_uscat,im_uscat\n";
    os << std::setprecision(17);
    for (std::size_t k = 0; k < bundle.grid_points.size(); ++k) {
        os << bundle.grid_points[k].x << ',' << bundle.grid_points[k].y << ','
           << bundle.grid_u[k].real() << ',' << bundle.grid_u[k].imag() << ','
           << bundle.grid_uscat[k].real() << ',' << bundle.grid_uscat[k].imag() << '\n';
    }
    if (!os) throw ConfigError("emit_field_csv: write failed for " + path);
}

void write_study_csv(const StudyReport& report, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("write_study_csv: cannot open " + path);
    os << "label,n";
    const std::size_t ne = report.rows.empty() ? 0 : report.rows.front().errors.size();
    for (std::size_t i = 0; i < ne; ++i) os << ",err" << i;
    os << ",time_factor,time_solve,time_total\n";
    os << std::setprecision(17);
    for (const StudyRow& row : report.rows) {
        os << row.label << ',' << row.n;
        for (double e : row.errors) os << ',' << e;
        os << ',' << row.time_factor << ',' << row.time_solve << ',' << row.time_total << '\n';
    }
    os << "# estimated_order," << report.estimated_order << '\n';
}

}  // namespace ls2d
