#pragma once

#include <Eigen/Dense>
#include <array>

#include "ls2d/basis.hpp"
#include "ls2d/common.hpp"

namespace ls2d {

/// Per-level far-field machinery: the moment integrals
///   C_{nl} = int_B J_n(kappa |y - B_c|) e^{-i n theta_y} b_l((y - B_c)/L_B) dy
/// for n in [-L, L] (row n + L), and their contraction Mdag = C Qdag mapping
/// grid values to multipole coefficients. Child variants expand the parent
/// basis about the four child centers (separated-fine evaluation).
struct FarFieldMoments {
    int L = 45;
    double kappa = 0.0;
    double box_side = 0.0;  // L_B of the level
    int p = 0;
    int n_basis = 0;
    Eigen::MatrixXcd C;     // (2L+1) x N_p
    Eigen::MatrixXcd Mdag;  // (2L+1) x p^2
    std::array<Eigen::MatrixXcd, 4> C_child;
    std::array<Eigen::MatrixXcd, 4> Mdag_child;
};

/// Requires kappa * box_side <= 8 (table-range rule guarantees this for any
/// valid tree level). All integrals evaluated adaptively to 1e-13.
FarFieldMoments build_far_moments(double kappa, double box_side, int L,
                                  const InterpOperator& interp, int nthreads = 0);

struct HankelWorkspace {
    std::vector<double> j, y;
};

/// (i/4) sum_{n=-L}^{L} moments(n+L) H_n(kappa d) e^{i n theta} for a target
/// at `rel` = target - expansion_center. Terms past the Y-overflow horizon or
/// below the roundoff floor are dropped (their products are negligible).
/// Refuses targets inside the expansion's invalid disk (d <= 0.72 * box_side
/// of the expansion box, passed as `validity_side`).
Complex eval_multipole(const Eigen::Ref<const Eigen::VectorXcd>& moments, double kappa,
                       Point2 rel, double validity_side, HankelWorkspace& ws);

}  // namespace ls2d
