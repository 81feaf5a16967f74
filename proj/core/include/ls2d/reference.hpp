#pragma once

#include <functional>
#include <vector>

#include "ls2d/basis.hpp"
#include "ls2d/common.hpp"
#include "ls2d/quadtree.hpp"

namespace ls2d {

/// int_U H_0^(1)(z |t - u|) b_l(u) du over the unit box, by graded-panel
/// Gauss quadrature with double-double accumulation. Ground-truth side of the
/// near-table and multipole comparisons; independent of both.
Complex kernel_basis_integral(const BasisSpec& basis, int l, Point2 target, double z);

/// Brute-force V_ij: direct quadrature of the Hankel-kernel integrals against
/// every basis function, contracted with the Q-pseudoinverse column of j.
/// tol is a floor on the requested accuracy (>= 1e-13 honored).
Complex reference_entry(const QuadTree& tree, const InterpOperator& interp, long i, long j,
                        double tol = 1e-12);

/// Radially symmetric scattering problem: q(|x|) compactly supported in
/// r <= support_radius, plane-wave incidence e^{i kappa x_1}.
struct RadialProblem {
    std::function<double(double)> q_r;
    double support_radius = 1.0;
    double kappa = 1.0;
    int n_modes = 0;        // 0 -> kappa * R + 50
    double ode_tol = 1e-12;  // local error control of the radial integrator
};

/// Total field u = u_inc + u_scat at the targets via separation of variables:
/// per-mode radial ODE solved to the support radius, matched to outgoing
/// Hankel modes by value/derivative continuity.
std::vector<Complex> radial_reference(const RadialProblem& problem,
                                      const std::vector<Point2>& targets);

}  // namespace ls2d
