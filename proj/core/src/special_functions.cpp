#include "ls2d/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ls2d {

namespace {

constexpr DD kPiDD{3.141592653589793116, 1.2246467991473531772e-16};
constexpr double kAsymptoticSwitch = 20.0;

// --- power series in double-double, x < kAsymptoticSwitch ------------------
//
// The raw series for J and the log-free part of Y lose up to e^x in
// cancellation; dd arithmetic keeps the headroom (e^20 ~ 5e8 << 1e16 of the
// extra mantissa).

DD j0_series(double x) {
    DD q = DD(x) * DD(x) * 0.25;  // (x/2)^2
    DD term(1.0), sum(1.0);
    for (int m = 1; m < 120; ++m) {
        term = term * q / static_cast<double>(m * m);
        if (m % 2)
            sum -= term;
        else
            sum += term;
        if (std::abs(term.hi) < 1e-35 * std::max(1.0, std::abs(sum.hi))) break;
    }
    return sum;
}

DD j1_series(double x) {
    DD q = DD(x) * DD(x) * 0.25;
    DD term = DD(x) * 0.5;
    DD sum = term;
    for (int m = 1; m < 120; ++m) {
        term = term * q / static_cast<double>(m * (m + 1));
        if (m % 2)
            sum -= term;
        else
            sum += term;
        if (std::abs(term.hi) < 1e-35 * std::max(1.0, std::abs(sum.hi))) break;
    }
    return sum;
}

// sum_{k>=1} H_k (-q)^k / (k!)^2 with q = (x/2)^2, needed by Y0
DD y0_hsum(double x) {
    DD q = DD(x) * DD(x) * 0.25;
    DD a(1.0);       // q^k/(k!)^2, signed below
    DD h(0.0);       // H_k
    DD sum(0.0);
    for (int k = 1; k < 120; ++k) {
        a = a * q / static_cast<double>(k * k);
        h += DD(1.0) / static_cast<double>(k);
        DD term = h * a;
        if (k % 2)
            sum -= term;
        else
            sum += term;
        if (std::abs(term.hi) < 1e-35 * std::max(1.0, std::abs(sum.hi))) break;
    }
    return sum;
}

// sum_{k>=0} (H_k + H_{k+1}) (-q)^k / (k!(k+1)!), needed by Y1
DD y1_hsum(double x) {
    DD q = DD(x) * DD(x) * 0.25;
    DD a(1.0);  // q^k/(k!(k+1)!)
    DD hk(0.0), hk1(1.0);
    DD sum = hk1;  // k = 0 term: (H_0 + H_1) * 1 = 1
    for (int k = 1; k < 120; ++k) {
        a = a * q / static_cast<double>(k * (k + 1));
        hk += DD(1.0) / static_cast<double>(k);
        hk1 += DD(1.0) / static_cast<double>(k + 1);
        DD term = (hk + hk1) * a;
        if (k % 2)
            sum -= term;
        else
            sum += term;
        if (std::abs(term.hi) < 1e-35 * std::max(1.0, std::abs(sum.hi))) break;
    }
    return sum;
}

// --- Hankel asymptotic expansion, x >= kAsymptoticSwitch --------------------

struct PQ {
    double p, q;
};

PQ asymptotic_pq(int nu, double x) {
    const double mu = 4.0 * nu * nu;
    const double inv8x = 1.0 / (8.0 * x);
    double term = 1.0;
    double p = 1.0, q = 0.0;
    double prev = std::numeric_limits<double>::max();
    for (int k = 1; k < 120; ++k) {
        const double d = 2.0 * k - 1.0;
        term *= (mu - d * d) * inv8x / k;
        if (std::abs(term) >= prev) break;  // asymptotic tail turned
        prev = std::abs(term);
        switch (k % 4) {
            case 1: q += term; break;
            case 2: p -= term; break;
            case 3: q -= term; break;
            case 0: p += term; break;
        }
        if (std::abs(term) < 1e-19) break;
    }
    return {p, q};
}

void jy_asymptotic(int nu, double x, double& j, double& y) {
    PQ pq = asymptotic_pq(nu, x);
    // omega = x - (2 nu + 1) pi/4, reduced mod 2pi in dd
    DD omega = DD(x) - kPiDD * (0.25 * (2.0 * nu + 1.0));
    DD two_pi = kPiDD * 2.0;
    double cycles = std::nearbyint(omega.to_double() / two_pi.to_double());
    DD reduced = omega - two_pi * cycles;
    const double w = reduced.to_double();
    const double c = std::cos(w), s = std::sin(w);
    const double amp = std::sqrt(2.0 / (kPi * x));
    j = amp * (pq.p * c - pq.q * s);
    y = amp * (pq.p * s + pq.q * c);
}

double j0_impl(double x) {
    if (x < kAsymptoticSwitch) return j0_series(x).to_double();
    double j, y;
    jy_asymptotic(0, x, j, y);
    return j;
}

double j1_impl(double x) {
    if (x < kAsymptoticSwitch) return j1_series(x).to_double();
    double j, y;
    jy_asymptotic(1, x, j, y);
    return j;
}

double y0_impl(double x) {
    if (x < kAsymptoticSwitch) {
        DD j0 = j0_series(x);
        double lg = std::log(0.5 * x) + kEulerGamma;
        DD val = (lg * j0 - y0_hsum(x)) * (2.0 / kPi);
        return val.to_double();
    }
    double j, y;
    jy_asymptotic(0, x, j, y);
    return y;
}

double y1_impl(double x) {
    if (x < kAsymptoticSwitch) {
        DD j1 = j1_series(x);
        double lg = std::log(0.5 * x) + kEulerGamma;
        DD hpart = (DD(x) * 0.25) * y1_hsum(x);
        DD val = (lg * j1 - 1.0 / x - hpart) * (2.0 / kPi);
        return val.to_double();
    }
    double j, y;
    jy_asymptotic(1, x, j, y);
    return y;
}

int miller_start(int nmax, double x) {
    // the start offset must clear the Airy transition zone: contamination of
    // the dominant solution decays like exp(-c delta^{3/2}/sqrt(x)), so
    // delta ~ x^{1/3} with a generous constant
    const int turn = static_cast<int>(x + 12.0 * std::cbrt(std::max(x, 1.0)) + 16.0);
    return std::max(nmax + 20, turn);
}

}  // namespace

void bessel_j_seq(int nmax, double x, double* out) {
    if (x < 0.0) throw NumericsError("bessel_j_seq: negative argument");
    if (x == 0.0) {
        out[0] = 1.0;
        std::fill(out + 1, out + nmax + 1, 0.0);
        return;
    }
    // Miller backward recurrence with the sum normalization
    //   J_0 + 2 sum_{k>=1} J_{2k} = 1.
    const int m0 = miller_start(nmax, x);
    double jp = 0.0;          // J~_{m+1}
    double jc = 1e-300;       // J~_{m}
    double norm = 0.0;
    const double inv_x = 1.0 / x;
    std::fill(out, out + nmax + 1, 0.0);
    for (int m = m0; m >= 1; --m) {
        double jm = (2.0 * m) * inv_x * jc - jp;
        jp = jc;
        jc = jm;
        if (m - 1 <= nmax) out[m - 1] = jc;
        if (((m - 1) & 1) == 0) norm += (m == 1 ? 1.0 : 2.0) * jc;
        if (std::abs(jc) > 1e280) {
            const double scale = 1e-280;
            jc *= scale;
            jp *= scale;
            norm *= scale;
            for (int n = 0; n <= nmax; ++n) out[n] *= scale;
        }
    }
    const double inv_norm = 1.0 / norm;
    for (int n = 0; n <= nmax; ++n) out[n] *= inv_norm;
}

void bessel_y_seq(int nmax, double x, double* out) {
    if (x <= 0.0) throw NumericsError("bessel_y: argument must be positive");
    out[0] = y0_impl(x);
    if (nmax >= 1) out[1] = y1_impl(x);
    const double inv_x = 1.0 / x;
    for (int n = 1; n < nmax; ++n) {
        if (std::abs(out[n]) > 1e290) {
            // downstream terms would overflow; saturate with the right signs
            for (int m = n + 1; m <= nmax; ++m)
                out[m] = out[n] > 0 ? -std::numeric_limits<double>::infinity()
                                    : std::numeric_limits<double>::infinity();
            return;
        }
        out[n + 1] = (2.0 * n) * inv_x * out[n] - out[n - 1];
    }
}

void hankel1_seq(int nmax, double x, Complex* out) {
    std::vector<double> j(nmax + 1), y(nmax + 1);
    bessel_j_seq(nmax, x, j.data());
    bessel_y_seq(nmax, x, y.data());
    for (int n = 0; n <= nmax; ++n) out[n] = Complex(j[n], y[n]);
}

double bessel_j(int n, double x) {
    const int an = std::abs(n);
    const double sign = (n < 0 && (an & 1)) ? -1.0 : 1.0;
    if (x == 0.0) return an == 0 ? 1.0 : 0.0;
    if (an == 0) return j0_impl(x);
    if (an == 1) return sign * j1_impl(x);
    std::vector<double> seq(an + 1);
    bessel_j_seq(an, x, seq.data());
    return sign * seq[an];
}

double bessel_y(int n, double x) {
    if (x <= 0.0) throw NumericsError("bessel_y: argument must be positive");
    const int an = std::abs(n);
    const double sign = (n < 0 && (an & 1)) ? -1.0 : 1.0;
    if (an == 0) return y0_impl(x);
    if (an == 1) return sign * y1_impl(x);
    std::vector<double> seq(an + 1);
    bessel_y_seq(an, x, seq.data());
    return sign * seq[an];
}

Complex hankel1(int n, double x) { return {bessel_j(n, x), bessel_y(n, x)}; }

double harmonic(int p) { return harmonic_dd(p).to_double(); }

DD harmonic_dd(int p) {
    DD h(0.0);
    for (int k = 1; k <= p; ++k) h += DD(1.0) / static_cast<double>(k);
    return h;
}

double erfc(double x) {
    if (x < 0.0) return 2.0 - erfc(-x);
    if (x < 1.0) {
        // 1 - erf via the Taylor series of erf
        double term = x;
        double sum = x;
        const double x2 = x * x;
        for (int k = 1; k < 80; ++k) {
            term *= -x2 / k;
            const double add = term / (2.0 * k + 1.0);
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum)) break;
        }
        return 1.0 - sum * 2.0 / std::sqrt(kPi);
    }
    if (x > 27.0) return 0.0;  // below double underflow of exp(-x^2)
    // continued fraction erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    // evaluated by the modified Lentz algorithm
    const double tiny = 1e-300;
    double f = tiny, c = f, d = 0.0;
    for (int k = 0; k < 300; ++k) {
        const double a = k == 0 ? 1.0 : 0.5 * k;
        const double b = x;
        d = b + a * d;
        if (d == 0.0) d = tiny;
        c = b + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-17) break;
    }
    return std::exp(-x * x) / std::sqrt(kPi) * f;
}

HankelSeriesCoeffs series_coeffs(double z, int pmax) {
    if (!(z > 0.0) || z > 8.0) throw NumericsError("series_coeffs: z must lie in (0, 8]");
    if (pmax < 1) throw NumericsError("series_coeffs: pmax must be >= 1");
    HankelSeriesCoeffs sc;
    sc.z = z;
    sc.pmax = pmax;
    sc.gamma_plus_log_z = kEulerGamma + std::log(z);
    sc.a.resize(pmax + 1);
    sc.ha.resize(pmax + 1);
    sc.c.resize(pmax + 1);
    sc.d.resize(pmax + 1);
    DD mz2 = -(DD(z) * DD(z));
    DD a(1.0), h(0.0);
    const Complex two_i_over_pi(0.0, 2.0 / kPi);
    for (int m = 0; m <= pmax; ++m) {
        if (m > 0) {
            a = a * mz2 / static_cast<double>(m * m);
            h += DD(1.0) / static_cast<double>(m);
        }
        sc.a[m] = a;
        sc.ha[m] = h * a;
        const double am = a.to_double();
        const double gm = (sc.gamma_plus_log_z - h.to_double()) * am;
        sc.c[m] = am + two_i_over_pi * gm;
        sc.d[m] = two_i_over_pi * am;
    }
    return sc;
}

}  // namespace ls2d
