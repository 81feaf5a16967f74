#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ls2d/common.hpp"
#include "ls2d/quadtree.hpp"

namespace ls2d {

enum class ProblemId { Gaussian, FlatBump, MultiBump, Plasma, Custom };

ProblemId problem_id_from_string(const std::string& name);
const char* problem_id_name(ProblemId id);

enum class SolverKind { Hodlr, Dense };

struct ProblemSpec {
    ProblemId id = ProblemId::Gaussian;
    BoxGeom domain{{0.0, 0.0}, 4.0, 0};  // [-2, 2]^2 unless overridden
    double kappa = 40.0;
    int p = 4;
    double m_ppw = 0.5;
    double eps_data = 1e-8;
    SolverKind solver = SolverKind::Hodlr;
    double eps_h = 0.0;  // 0 -> eps_data * 1e-4
    std::uint64_t seed = 7;
    std::vector<Point2> eval_points;
    int grid_nx = 0, grid_ny = 0;
    std::string out_path;
    std::string table_cache;
    int nthreads = 0;
    int L = 45;
    int pmax = 60;
    int max_level = 30;
    int n_leaf = 128;
    bool timing = false;
    int uniform_depth = -1;  // >= 0 forces a uniform tree of that depth
    RealField custom_q;      // ProblemId::Custom
};

/// Plane wave e^{i kappa x_1}.
Complex incident_wave(double kappa, Point2 x);

/// Contrast function for the spec'd problem.
RealField make_contrast(const ProblemSpec& spec);

/// Right-hand side f(x) = -kappa^2 q(x) u_inc(x).
ScalarField make_rhs(double kappa, RealField q);

/// The 20 deterministic multi-bump centers drawn from the seed (documented
/// splitmix64 generator), uniform in [-1.5, 1.5]^2.
std::vector<Point2> multibump_centers(std::uint64_t seed);

}  // namespace ls2d
