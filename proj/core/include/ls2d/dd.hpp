#pragma once

#include <cmath>
#include <complex>

namespace ls2d {

/// Double-double value: an unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
/// Gives ~31 significant digits. Used where the near-field series contraction
/// would otherwise lose up to 5 digits to cancellation.
struct DD {
    double hi = 0.0;
    double lo = 0.0;

    DD() = default;
    constexpr DD(double h) : hi(h), lo(0.0) {}
    constexpr DD(double h, double l) : hi(h), lo(l) {}

    double to_double() const { return hi + lo; }
};

namespace detail {
inline DD two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}
inline DD quick_two_sum(double a, double b) {
    // requires |a| >= |b|
    double s = a + b;
    return {s, b - (s - a)};
}
inline DD two_prod(double a, double b) {
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}
}  // namespace detail

inline DD operator+(DD a, DD b) {
    DD s = detail::two_sum(a.hi, b.hi);
    double lo = s.lo + a.lo + b.lo;
    return detail::quick_two_sum(s.hi, lo);
}
inline DD operator+(DD a, double b) { return a + DD(b); }
inline DD operator+(double a, DD b) { return DD(a) + b; }

inline DD operator-(DD a) { return {-a.hi, -a.lo}; }
inline DD operator-(DD a, DD b) { return a + (-b); }
inline DD operator-(DD a, double b) { return a + DD(-b); }
inline DD operator-(double a, DD b) { return DD(a) + (-b); }

inline DD operator*(DD a, DD b) {
    DD p = detail::two_prod(a.hi, b.hi);
    double lo = p.lo + a.hi * b.lo + a.lo * b.hi;
    return detail::quick_two_sum(p.hi, lo);
}
inline DD operator*(DD a, double b) {
    DD p = detail::two_prod(a.hi, b);
    double lo = p.lo + a.lo * b;
    return detail::quick_two_sum(p.hi, lo);
}
inline DD operator*(double a, DD b) { return b * a; }

inline DD operator/(DD a, DD b) {
    double q1 = a.hi / b.hi;
    DD r = a - b * q1;
    double q2 = r.hi / b.hi;
    r = r - b * q2;
    double q3 = r.hi / b.hi;
    DD q = detail::quick_two_sum(q1, q2);
    return q + q3;
}
inline DD operator/(DD a, double b) { return a / DD(b); }
inline DD operator/(double a, DD b) { return DD(a) / b; }

inline DD& operator+=(DD& a, DD b) { a = a + b; return a; }
inline DD& operator-=(DD& a, DD b) { a = a - b; return a; }
inline DD& operator*=(DD& a, DD b) { a = a * b; return a; }

inline bool operator<(DD a, DD b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(DD a, DD b) { return b < a; }

inline DD abs(DD a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? -a : a; }

/// ln(2) to double-double accuracy, computed once via 2*atanh(1/3).
DD dd_ln2();

/// Natural log of a positive double-double, accurate to ~1e-31 relative.
DD dd_log(DD x);

/// Complex value with double-double components.
struct CDD {
    DD re, im;

    CDD() = default;
    CDD(DD r, DD i) : re(r), im(i) {}
    explicit CDD(std::complex<double> z) : re(z.real()), im(z.imag()) {}

    std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }
};

inline CDD operator+(CDD a, CDD b) { return {a.re + b.re, a.im + b.im}; }
inline CDD operator*(CDD a, DD s) { return {a.re * s, a.im * s}; }
inline CDD operator*(CDD a, CDD b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline CDD& operator+=(CDD& a, CDD b) { a = a + b; return a; }

}  // namespace ls2d
