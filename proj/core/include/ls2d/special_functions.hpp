#pragma once

#include <vector>

#include "ls2d/common.hpp"
#include "ls2d/dd.hpp"

namespace ls2d {

inline constexpr double kEulerGamma = 0.5772156649015328606065120900824024310;

/// Bessel functions of integer order. Absolute error <= 1e-13 * max(1, |value|)
/// for |n| <= ~60 and x up to 1e4. Negative orders follow
/// J_{-n} = (-1)^n J_n, Y_{-n} = (-1)^n Y_n.
double bessel_j(int n, double x);
double bessel_y(int n, double x);  // requires x > 0
Complex hankel1(int n, double x);  // J_n(x) + i Y_n(x), x > 0

/// J_0..J_nmax in one backward-recurrence pass.
void bessel_j_seq(int nmax, double x, double* out);
/// Y_0..Y_nmax by upward recurrence. Entries past the overflow horizon are
/// +-inf; callers relying on deep orders at tiny arguments must guard.
void bessel_y_seq(int nmax, double x, double* out);
void hankel1_seq(int nmax, double x, Complex* out);

/// Harmonic number H_p = 1 + 1/2 + ... + 1/p, H_0 = 0.
double harmonic(int p);
DD harmonic_dd(int p);

/// Complementary error function, absolute error <= 1e-14.
double erfc(double x);

/// Coefficients of the kernel series
///   H_0^(1)(z r) = sum_m c_m(z) (r/2)^{2m} + sum_m d_m(z) (r/2)^{2m} log(r/2)
/// with a_m(z) = (-z^2)^m/(m!)^2, g_m(z) = (gamma + log z - H_m) a_m(z),
/// c_m = a_m + (2i/pi) g_m, d_m = (2i/pi) a_m.
struct HankelSeriesCoeffs {
    double z = 0.0;
    int pmax = 0;
    std::vector<Complex> c;
    std::vector<Complex> d;
    // double-double internals for the cancellation-prone table contraction
    std::vector<DD> a;    // a_m(z)
    std::vector<DD> ha;   // H_m * a_m(z)
    double gamma_plus_log_z = 0.0;
};

/// Requires 0 < z <= 8. pmax defaults to 60 elsewhere; must be >= 1.
HankelSeriesCoeffs series_coeffs(double z, int pmax);

}  // namespace ls2d
