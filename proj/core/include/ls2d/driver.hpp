#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ls2d/hodlr.hpp"
#include "ls2d/problems.hpp"

namespace ls2d {

struct SolutionBundle {
    long n = 0;
    int m_leaves = 0;
    int max_level = 0;
    std::vector<Complex> psi;
    double residual = 0.0;  // sampled-row certificate ||A psi - f||inf / ||f||inf
    HodlrStats hodlr;

    struct Timings {
        double tree = 0.0, context = 0.0, factor = 0.0, solve = 0.0, post = 0.0;
    } timings;

    std::vector<Point2> eval_points;
    std::vector<Complex> eval_u;       // total field
    std::vector<Complex> eval_uscat;   // scattered field

    int grid_nx = 0, grid_ny = 0;
    std::vector<Point2> grid_points;   // row-major, x fastest
    std::vector<Complex> grid_u;
    std::vector<Complex> grid_uscat;
};

/// Full pipeline: tree -> entry context -> factor -> solve -> field outputs.
/// Writes the field CSV when spec.out_path is set and a grid was requested.
SolutionBundle run(const ProblemSpec& spec);

struct StudyRow {
    std::string label;      // eps or N tag
    long n = 0;
    double time_factor = 0.0;
    double time_solve = 0.0;
    double time_total = 0.0;
    std::vector<Complex> values;  // u at eval points
    std::vector<double> errors;   // vs reference (may be empty for Richardson anchor)
};

struct StudyReport {
    std::vector<StudyRow> rows;
    double estimated_order = 0.0;  // log-log slope of error vs h = N^{-1/2}
    bool radial_reference_used = false;
};

struct StudyLadder {
    std::vector<double> eps_values;  // adaptive ladder
    std::vector<long> uniform_n;     // dyadic-N ladder (p^2 4^depth each)
};

/// Convergence study over an eps ladder or a dyadic uniform-N ladder. Radial
/// problems (gaussian, flatbump) are scored against radial_reference; others
/// against Richardson extrapolation of the two finest rungs. Writes a CSV to
/// spec.out_path when set.
StudyReport convergence_study(const ProblemSpec& spec, const StudyLadder& ladder);

/// CSV "x,y,re_u,im_u,re_uscat,im_uscat", 17 significant digits, row-major.
void emit_field_csv(const SolutionBundle& bundle, const std::string& path);

void write_study_csv(const StudyReport& report, const std::string& path);

}  // namespace ls2d
