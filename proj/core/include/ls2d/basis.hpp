#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ls2d/common.hpp"
#include "ls2d/dd.hpp"

namespace ls2d {

enum class BasisKind { Monomial, Chebyshev };

/// Polynomial basis of total degree < p on the unit box [-1/2, 1/2]^2.
/// Monomials xi1^a xi2^b for p = 4, T_a(2 xi1) T_b(2 xi2) for p > 4.
/// Enumeration of (a, b) is graded-lex: by a+b, then by a.
struct BasisSpec {
    int p = 4;
    BasisKind kind = BasisKind::Monomial;
    int n_basis = 10;  // p (p+1) / 2
    std::vector<std::pair<int, int>> exponents;
};

BasisSpec make_basis(int p);

/// b_l at (xi1, xi2), unit-box coordinates; l is 1-based per the enumeration.
double basis_eval(const BasisSpec& spec, int l, double xi1, double xi2);

/// Same in double-double (table generation path).
DD basis_eval_dd(const BasisSpec& spec, int l, DD xi1, DD xi2);

/// All n_basis values at once.
void basis_eval_all(const BasisSpec& spec, double xi1, double xi2, double* out);
void basis_eval_all_dd(const BasisSpec& spec, DD xi1, DD xi2, DD* out);

/// 1D grid coordinates on [-1/2, 1/2]: cell-centered uniform for p = 4,
/// Chebyshev first-kind roots (ascending) for p > 4.
std::vector<double> grid_coords_1d(int p);

/// Tensor grid of p^2 points on the unit box, row-major (x fastest):
/// point j = iy * p + ix.
std::vector<Point2> unit_grid_points(int p);

/// Interpolation matrix Q (p^2 x N_p) and its SVD pseudoinverse.
struct InterpOperator {
    BasisSpec spec;
    Eigen::MatrixXd Q;     // p^2 x N_p
    Eigen::MatrixXd Qdag;  // N_p x p^2
    double sigma_min = 0.0;
    double sigma_max = 0.0;
};

/// Builds Q over the given unit-box grid and the pseudoinverse via SVD with
/// singular values below 1e-12 * sigma_max truncated. Refuses when
/// sigma_min < 1e-10 * sigma_max (grid/basis pairing is rank deficient).
InterpOperator build_interp(const BasisSpec& spec, const std::vector<Point2>& grid);

/// Convenience: operator for the standard grid of order p.
InterpOperator build_interp(int p);

}  // namespace ls2d
