#include <doctest.h>

#include <cmath>

#include "ls2d/multipole.hpp"
#include "ls2d/quadrature.hpp"
#include "ls2d/reference.hpp"
#include "ls2d/special_functions.hpp"

using namespace ls2d;

TEST_CASE("moment integrals: limits, symmetry, decay") {
    InterpOperator interp = build_interp(4);
    const double side = 1.0;

    // kappa -> 0: C_{0,1} -> area (J_0 -> 1)
    FarFieldMoments small = build_far_moments(1e-4, side, 8, interp);
    CHECK(std::abs(small.C(8, 0) - 1.0) < 1e-7);
    // additivity: children of the constant basis tile the parent integral
    Complex child_sum(0.0);
    for (int c = 0; c < 4; ++c) child_sum += small.C_child[c](8, 0);
    CHECK(std::abs(child_sum - small.C(8, 0)) < 1e-13);

    FarFieldMoments fm = build_far_moments(4.0, side, 45, interp);
    // conjugate symmetry for the real basis, against direct quadrature of the
    // negative-order integrand
    for (int n : {1, 3, 7}) {
        for (int l : {0, 3, 9}) {
            CHECK(std::abs(fm.C(45 - n, l) - std::conj(fm.C(45 + n, l))) < 1e-14);
            auto f = [&](Point2 u) -> Complex {
                const double rho = norm(u);
                if (rho == 0.0) return Complex(0.0);
                Complex w(u.x / rho, u.y / rho);  // e^{+i theta}
                Complex phase(1.0);
                for (int k = 0; k < n; ++k) phase *= w;
                return bessel_j(-n, 4.0 * rho) * phase *
                       basis_eval(interp.spec, l + 1, u.x, u.y);
            };
            Complex direct =
                adaptive_quad_2d(f, Rect{{-0.5, -0.5}, {0.5, 0.5}}, 1e-13).value;
            CHECK(std::abs(fm.C(45 - n, l) - direct) < 1e-12);
        }
    }
    // super-exponential decay past n ~ kappa L_B e/2 + 20
    const int n_threshold = static_cast<int>(4.0 * std::exp(1.0) / 2.0 + 20.0);
    for (int n = n_threshold; n <= 45; ++n)
        for (int l = 0; l < interp.spec.n_basis; ++l) {
            CHECK(std::abs(fm.C(45 + n, l)) < 1e-16);
            CHECK(std::abs(fm.C(45 - n, l)) < 1e-16);
        }
}

TEST_CASE("multipole evaluation against direct kernel quadrature") {
    InterpOperator interp = build_interp(4);
    const double side = 0.5, kappa = 8.0;  // z = 4
    FarFieldMoments fm = build_far_moments(kappa, side, 45, interp);
    HankelWorkspace ws;

    // single-basis sources, targets on and off axis
    for (int l : {0, 2, 7}) {
        for (Point2 trel : {Point2{2.0 * side, 0.0}, Point2{1.5 * side, -1.3 * side},
                            Point2{-4.0 * side, 2.5 * side}}) {
            const Complex got = eval_multipole(fm.C.col(l), kappa, trel, side, ws);
            const Point2 that = (1.0 / side) * trel;
            const Complex oracle = Complex(0.0, 0.25) * side * side *
                                   kernel_basis_integral(interp.spec, l + 1, that, kappa * side);
            CHECK(std::abs(got - oracle) <= 1e-12 * std::max(std::abs(oracle), 1e-10));
        }
    }

    // truncation self-convergence: L = 20 vs L = 45 at distance 2 L_B
    FarFieldMoments fm20 = build_far_moments(kappa, side, 20, interp);
    const Point2 trel{2.0 * side, 0.7 * side};
    for (int l : {0, 5}) {
        const Complex a = eval_multipole(fm20.C.col(l), kappa, trel, side, ws);
        const Complex b = eval_multipole(fm.C.col(l), kappa, trel, side, ws);
        CHECK(std::abs(a - b) <= 1e-5 * std::max(1e-8, std::abs(b)));
    }

    // invalid-disk refusal
    CHECK_THROWS_AS(eval_multipole(fm.C.col(0), kappa, Point2{0.3 * side, 0.0}, side, ws),
                    NumericsError);
}

TEST_CASE("truncation error trend ~ 2^{-L} at the margin distance") {
    InterpOperator interp = build_interp(4);
    const double side = 1.0, kappa = 4.0;
    const Point2 trel{1.5 * side, 0.0};  // the dispatch margin
    const Complex oracle = Complex(0.0, 0.25) * side * side *
                           kernel_basis_integral(interp.spec, 1, trel, kappa * side);
    HankelWorkspace ws;
    double prev_err = 0.0;
    for (int L : {10, 20, 30}) {
        FarFieldMoments fm = build_far_moments(kappa, side, L, interp);
        const double err = std::abs(eval_multipole(fm.C.col(0), kappa, trel, side, ws) - oracle);
        if (prev_err > 0.0) {
            const double slope = std::log2(err / prev_err) / 10.0;
            CHECK(slope < -0.7);
            CHECK(slope > -1.3);
        }
        prev_err = err;
    }
}

TEST_CASE("build_far_moments range checks") {
    InterpOperator interp = build_interp(4);
    CHECK_THROWS_AS(build_far_moments(10.0, 1.0, 20, interp), NumericsError);  // z > 8
}
