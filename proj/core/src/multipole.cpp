#include "ls2d/multipole.hpp"

#include <cmath>

#include "ls2d/parallel.hpp"
#include "ls2d/quadrature.hpp"
#include "ls2d/special_functions.hpp"

namespace ls2d {

namespace {

// C-row integrand for one order n over the unit box, all basis components:
//   J_n(z rho) e^{-i n theta} b_l(arg_scale * u + arg_shift)
// area scaling (box_side^2 for the level, (box_side/2)^2 for children) is
// applied by the caller.
Eigen::MatrixXcd moment_rows(int L, double z, const BasisSpec& basis, double arg_scale,
                             Point2 arg_shift, int nthreads) {
    const int nb = basis.n_basis;
    Eigen::MatrixXcd C(2 * L + 1, nb);
    parallel_for(L + 1, nthreads, [&](long n) {
        std::vector<double> bl(nb);
        auto f = [&](Point2 u, Complex* out) {
            const double rho = norm(u);
            basis_eval_all(basis, arg_scale * u.x + arg_shift.x, arg_scale * u.y + arg_shift.y,
                           bl.data());
            if (rho == 0.0) {
                for (int l = 0; l < nb; ++l) out[l] = n == 0 ? Complex(bl[l]) : Complex(0.0);
                return;
            }
            const double jn = bessel_j(static_cast<int>(n), z * rho);
            Complex w(u.x / rho, -u.y / rho);  // e^{-i theta}
            Complex phase(1.0);
            for (int k = 0; k < n; ++k) phase *= w;
            const Complex v = jn * phase;
            for (int l = 0; l < nb; ++l) out[l] = v * bl[l];
        };
        std::vector<Complex> row =
            adaptive_quad_2d_vec(f, nb, Rect{{-0.5, -0.5}, {0.5, 0.5}}, 1e-13);
        for (int l = 0; l < nb; ++l) {
            C(L + static_cast<int>(n), l) = row[l];
            // C_{-n,l} = conj(C_{n,l}) for real basis functions
            C(L - static_cast<int>(n), l) = std::conj(row[l]);
        }
    });
    return C;
}

}  // namespace

FarFieldMoments build_far_moments(double kappa, double box_side, int L,
                                  const InterpOperator& interp, int nthreads) {
    const double z = kappa * box_side;
    if (!(z > 0.0) || z > 8.0)
        throw NumericsError("build_far_moments: kappa * side outside (0, 8]");
    FarFieldMoments fm;
    fm.L = L;
    fm.kappa = kappa;
    fm.box_side = box_side;
    fm.p = interp.spec.p;
    fm.n_basis = interp.spec.n_basis;

    const double area = box_side * box_side;
    fm.C = moment_rows(L, z, interp.spec, 1.0, {0.0, 0.0}, nthreads) * area;
    const Eigen::MatrixXcd qdag = interp.Qdag.cast<Complex>();
    fm.Mdag = fm.C * qdag;
    const double child_area = 0.25 * area;
    for (int c = 0; c < 4; ++c) {
        fm.C_child[c] =
            moment_rows(L, 0.5 * z, interp.spec, 0.5, kChildCenterUnit[c], nthreads) * child_area;
        fm.Mdag_child[c] = fm.C_child[c] * qdag;
    }
    return fm;
}

Complex eval_multipole(const Eigen::Ref<const Eigen::VectorXcd>& moments, double kappa,
                       Point2 rel, double validity_side, HankelWorkspace& ws) {
    const int L = static_cast<int>((moments.size() - 1) / 2);
    const double d = norm(rel);
    if (d <= 0.72 * validity_side)
        throw NumericsError("eval_multipole: target inside the expansion's invalid disk");
    const double x = kappa * d;

    ws.j.resize(L + 1);
    bessel_j_seq(L, x, ws.j.data());
    const double y0 = bessel_y(0, x);
    const double y1 = L >= 1 ? bessel_y(1, x) : 0.0;

    const Complex eith(rel.x / d, rel.y / d);  // e^{i theta}
    Complex sum = moments(L) * Complex(ws.j[0], y0);

    Complex phase(1.0);
    double ym = y0, yc = y1;
    const double floor_scale = 1e-18;
    int quiet = 0;
    for (int n = 1; n <= L; ++n) {
        if (n >= 2) {
            const double yn = (2.0 * (n - 1)) / x * yc - ym;
            ym = yc;
            yc = yn;
            if (std::abs(yc) > 1e290) break;  // deeper terms are negligible products
        }
        phase *= eith;
        const Complex hn(ws.j[n], yc);
        const double parity = (n & 1) ? -1.0 : 1.0;
        // n and -n together; H_{-n} = (-1)^n H_n, e^{-in theta} = conj(phase)
        const Complex term =
            moments(L + n) * hn * phase + moments(L - n) * (parity * hn) * std::conj(phase);
        sum += term;
        if (std::abs(term) < floor_scale * std::abs(sum)) {
            if (++quiet >= 3) break;
        } else {
            quiet = 0;
        }
    }
    return Complex(0.0, 0.25) * sum;
}

}  // namespace ls2d
