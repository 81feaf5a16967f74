#pragma once

#include <vector>

#include "ls2d/dd.hpp"

namespace ls2d {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

/// Same rule with double-double nodes and weights; needed by the moment
/// tabulation, whose downstream contraction amplifies node errors by ~1e4.
struct GaussRuleDD {
    std::vector<DD> x;
    std::vector<DD> w;
};

/// Cached rules; thread-safe after first use of each order.
const GaussRule& gauss_legendre(int n);
const GaussRuleDD& gauss_legendre_dd(int n);

}  // namespace ls2d
