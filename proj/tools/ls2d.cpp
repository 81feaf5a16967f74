// ls2d: adaptive volume-integral scattering solver CLI.
//   ls2d solve  --problem gaussian --kappa 40 --eps 1e-8 --eval 0.5,0
//   ls2d study  --problem gaussian --kappa 40 --ladder-n 4096,16384,65536 --eval 0.5,0
//   ls2d tables --p 4 --table-cache ./tables

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "ls2d/driver.hpp"
#include "ls2d/near_field_table.hpp"

namespace {

struct CliOptions {
    ls2d::ProblemSpec spec;
    std::string problem = "gaussian";
    std::string solver = "hodlr";
    std::vector<double> domain;       // cx, cy, side
    std::vector<std::string> evals;   // "x,y"
    std::vector<int> grid;            // nx, ny
    std::vector<double> ladder_eps;
    std::vector<long> ladder_n;
    int pmax = 60;
    int order_l = 45;
};

ls2d::Point2 parse_point(const std::string& s) {
    double x = 0, y = 0;
    if (std::sscanf(s.c_str(), "%lf,%lf", &x, &y) != 2)
        throw ls2d::ConfigError("expected x,y but got '" + s + "'");
    return {x, y};
}

void finalize(CliOptions& o) {
    o.spec.id = ls2d::problem_id_from_string(o.problem);
    if (o.solver == "hodlr")
        o.spec.solver = ls2d::SolverKind::Hodlr;
    else if (o.solver == "dense")
        o.spec.solver = ls2d::SolverKind::Dense;
    else
        throw ls2d::ConfigError("unknown solver: " + o.solver);
    if (!o.domain.empty()) {
        if (o.domain.size() != 3) throw ls2d::ConfigError("--domain expects cx,cy,side");
        o.spec.domain = {{o.domain[0], o.domain[1]}, o.domain[2], 0};
    }
    for (const std::string& e : o.evals) o.spec.eval_points.push_back(parse_point(e));
    if (!o.grid.empty()) {
        if (o.grid.size() != 2) throw ls2d::ConfigError("--grid expects nx,ny");
        o.spec.grid_nx = o.grid[0];
        o.spec.grid_ny = o.grid[1];
    }
    o.spec.pmax = o.pmax;
    o.spec.L = o.order_l;
}

void print_summary(const ls2d::SolutionBundle& b, bool timing) {
    std::printf("N=%ld leaves=%d max_level=%d residual=%.3e\n", b.n, b.m_leaves, b.max_level,
                b.residual);
    for (std::size_t k = 0; k < b.eval_points.size(); ++k) {
        std::printf("u(%.17g, %.17g) = %.17g %+.17gi  (uscat = %.17g %+.17gi)\n",
                    b.eval_points[k].x, b.eval_points[k].y, b.eval_u[k].real(),
                    b.eval_u[k].imag(), b.eval_uscat[k].real(), b.eval_uscat[k].imag());
    }
    if (timing)
        std::printf("time: tree=%.2fs context=%.2fs factor=%.2fs solve=%.2fs post=%.2fs\n",
                    b.timings.tree, b.timings.context, b.timings.factor, b.timings.solve,
                    b.timings.post);
}

void add_common(CLI::App* cmd, CliOptions& o) {
    cmd->add_option("--problem", o.problem, "gaussian|flatbump|multibump|plasma");
    cmd->add_option("--kappa", o.spec.kappa, "background wavenumber");
    cmd->add_option("--p", o.spec.p, "points per leaf dimension (even, >= 4)");
    cmd->add_option("--ppw", o.spec.m_ppw, "wavelength rule: leaves satisfy kappa*L < 2*pi*ppw");
    cmd->add_option("--eps", o.spec.eps_data, "data resolution tolerance");
    cmd->add_option("--solver", o.solver, "hodlr|dense");
    cmd->add_option("--hodlr-tol", o.spec.eps_h, "HODLR tolerance (default eps * 1e-4)");
    cmd->add_option("--domain", o.domain, "cx,cy,side")->delimiter(',');
    cmd->add_option("--eval", o.evals, "evaluation point x,y (repeatable)");
    cmd->add_option("--grid", o.grid, "output grid nx,ny")->delimiter(',');
    cmd->add_option("--seed", o.spec.seed, "multibump center seed");
    cmd->add_option("--out", o.spec.out_path, "output CSV path");
    cmd->add_option("--table-cache", o.spec.table_cache, "near-table cache directory");
    cmd->add_option("--threads", o.spec.nthreads, "worker threads (0 = hardware)");
    cmd->add_option("--pmax", o.pmax, "near-table series order");
    cmd->add_option("--order-l", o.order_l, "multipole truncation order");
    cmd->add_flag("--timing", o.spec.timing, "print stage timings");
    cmd->set_config("--config", "", "key=value config file");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive 2D volume-integral scattering solver"};
    app.require_subcommand(1);

    CliOptions o;
    CLI::App* solve = app.add_subcommand("solve", "solve one scattering problem");
    add_common(solve, o);
    CLI::App* study = app.add_subcommand("study", "convergence / scaling study");
    add_common(study, o);
    study->add_option("--ladder-eps", o.ladder_eps, "eps ladder values")->delimiter(',');
    study->add_option("--ladder-n", o.ladder_n, "uniform dyadic N ladder")->delimiter(',');
    CLI::App* tables = app.add_subcommand("tables", "precompute near-field tables");
    add_common(tables, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        finalize(o);
        if (solve->parsed()) {
            ls2d::SolutionBundle b = ls2d::run(o.spec);
            print_summary(b, o.spec.timing);
        } else if (study->parsed()) {
            ls2d::StudyLadder ladder;
            ladder.eps_values = o.ladder_eps;
            ladder.uniform_n = o.ladder_n;
            if (ladder.eps_values.empty() && ladder.uniform_n.empty())
                throw ls2d::ConfigError("study requires --ladder-eps or --ladder-n");
            ls2d::StudyReport rep = ls2d::convergence_study(o.spec, ladder);
            for (const ls2d::StudyRow& row : rep.rows) {
                std::printf("%-16s N=%-8ld", row.label.c_str(), row.n);
                for (double e : row.errors) std::printf(" err=%.3e", e);
                std::printf(" factor=%.2fs solve=%.2fs\n", row.time_factor, row.time_solve);
            }
            if (rep.estimated_order != 0.0)
                std::printf("estimated order: %.2f\n", rep.estimated_order);
        } else if (tables->parsed()) {
            if (o.spec.table_cache.empty())
                throw ls2d::ConfigError("tables requires --table-cache DIR");
            ls2d::TableCache cache(o.spec.table_cache, o.spec.nthreads);
            using R = ls2d::NearRelation;
            for (R rel : {R::Colleague, R::Coarse, R::Fine}) {
                for (bool split : {false, true}) {
                    if (rel == R::Coarse && split) continue;  // never needed in a valid tree
                    cache.get(rel, o.spec.p, o.pmax, split);
                    std::printf("cached %s%s\n", ls2d::relation_name(rel),
                                split ? " (child-split)" : "");
                }
            }
        }
    } catch (const ls2d::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ls2d::NumericsError& e) {
        std::cerr << "numerical refusal: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
