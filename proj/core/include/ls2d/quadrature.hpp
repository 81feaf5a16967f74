#pragma once

#include <functional>
#include <vector>

#include "ls2d/common.hpp"

namespace ls2d {

struct QuadResult {
    Complex value;
    double error_estimate = 0.0;
    long panels = 0;
};

struct QuadOptions {
    int order = 12;             // tensor Gauss order per panel
    long max_panels = 1000000;  // refusal past this
};

/// Adaptive tensor-Gauss quadrature of a complex integrand over a rectangle.
/// Deterministic for fixed inputs. The estimated absolute error satisfies
/// err <= tol * max(1, |result|); exceeding the panel budget raises
/// NumericsError carrying the achieved error.
QuadResult adaptive_quad_2d(const std::function<Complex(Point2)>& f, Rect box, double tol,
                            const QuadOptions& opts = {});

/// Vector-valued variant sharing panel refinement across components
/// (error controlled in the max norm, per-component scaled).
std::vector<Complex> adaptive_quad_2d_vec(const std::function<void(Point2, Complex*)>& f,
                                          int ncomp, Rect box, double tol,
                                          const QuadOptions& opts = {});

}  // namespace ls2d
