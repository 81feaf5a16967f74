#include "ls2d/dd.hpp"

namespace ls2d {

namespace {

// atanh(t) = sum t^(2k+1)/(2k+1); |t| <= 1/3 worst case (the ln2 seed).
DD atanh_series(DD t) {
    DD t2 = t * t;
    DD term = t;
    DD sum = t;
    for (int k = 1; k < 44; ++k) {
        term = term * t2;
        DD add = term / static_cast<double>(2 * k + 1);
        sum += add;
        if (std::abs(add.hi) < 1e-38 * std::abs(sum.hi)) break;
    }
    return sum;
}

}  // namespace

DD dd_ln2() {
    static const DD value = 2.0 * atanh_series(DD(1.0) / DD(3.0));
    return value;
}

DD dd_log(DD x) {
    // x = m * 2^e with m in [sqrt(1/2), sqrt(2)), then ln via atanh.
    int e = 0;
    double mh = std::frexp(x.hi, &e);  // mh in [0.5, 1)
    DD m(mh, std::ldexp(x.lo, -e));
    if (mh < 0.70710678118654752) {
        m = m * 2.0;
        e -= 1;
    }
    DD t = (m - 1.0) / (m + 1.0);
    return 2.0 * atanh_series(t) + static_cast<double>(e) * dd_ln2();
}

}  // namespace ls2d
