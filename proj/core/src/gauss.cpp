#include "ls2d/gauss.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "ls2d/common.hpp"

namespace ls2d {

namespace {

// Legendre P_n and P_n' at x, in double-double.
void legendre_pair(int n, DD x, DD& p, DD& dp) {
    DD p0(1.0), p1 = x;
    for (int k = 2; k <= n; ++k) {
        DD p2 = ((2.0 * k - 1.0) * (x * p1) - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    // (1-x^2) P_n'(x) = n (P_{n-1}(x) - x P_n(x))
    dp = static_cast<double>(n) * (p0 - x * p1) / (DD(1.0) - x * x);
}

GaussRuleDD compute_dd(int n) {
    GaussRuleDD rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < n; ++i) {
        DD x(std::cos(kPi * (i + 0.75) / (n + 0.5)));
        DD p, dp;
        for (int it = 0; it < 6; ++it) {
            legendre_pair(n, x, p, dp);
            DD dx = p / dp;
            x = x - dx;
            if (std::abs(dx.hi) < 1e-28) break;
        }
        legendre_pair(n, x, p, dp);
        rule.x[i] = x;
        rule.w[i] = 2.0 / ((DD(1.0) - x * x) * (dp * dp));
    }
    return rule;
}

std::mutex cache_mutex;

}  // namespace

const GaussRuleDD& gauss_legendre_dd(int n) {
    static std::map<int, GaussRuleDD> cache;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_dd(n)).first;
    return it->second;
}

const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        GaussRuleDD dd = compute_dd(n);
        GaussRule r;
        r.x.reserve(n);
        r.w.reserve(n);
        for (int i = 0; i < n; ++i) {
            r.x.push_back(dd.x[i].to_double());
            r.w.push_back(dd.w[i].to_double());
        }
        it = cache.emplace(n, std::move(r)).first;
    }
    return it->second;
}

}  // namespace ls2d
