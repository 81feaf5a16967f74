#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace ls2d {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Configuration / usage errors. CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical refusals (unresolvable data, quadrature budget, rank cap, ...).
/// CLI maps these to exit code 3.
struct NumericsError : std::runtime_error {
    explicit NumericsError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
};

inline double norm2(Point2 a) { return a.x * a.x + a.y * a.y; }
inline double norm(Point2 a) { return std::sqrt(norm2(a)); }
inline double dist(Point2 a, Point2 b) { return norm(a - b); }

/// Axis-aligned square box. side = root_side / 2^level exactly; centers sit on
/// the dyadic lattice of their level.
struct BoxGeom {
    Point2 center;
    double side = 1.0;
    int level = 0;

    double half() const { return 0.5 * side; }
    Point2 lo() const { return {center.x - half(), center.y - half()}; }
    Point2 hi() const { return {center.x + half(), center.y + half()}; }

    bool contains(Point2 p) const {
        return p.x >= lo().x && p.x <= hi().x && p.y >= lo().y && p.y <= hi().y;
    }
};

/// Prefactor of the volume-potential entry layer. The second-kind system
/// A = I + kappa^2 q V with rhs -kappa^2 q u_inc and field u = u_inc + V[psi]
/// is consistent only when the entry kernel is -(i/4) H_0^(1); the
/// reconstructed field is then the outgoing +(i/4) H_0^(1) potential of
/// kappa^2 q u. Table and multipole primitives keep the +(i/4) convention.
inline constexpr Complex kEntryPrefactor{0.0, -0.25};

/// Child-box centers in parent unit-box coordinates; child k = (k & 1, k >> 1).
inline constexpr Point2 kChildCenterUnit[4] = {
    {-0.25, -0.25}, {0.25, -0.25}, {-0.25, 0.25}, {0.25, 0.25}};

/// Closed rectangle used by the quadrature engine.
struct Rect {
    Point2 lo;
    Point2 hi;

    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
    double area() const { return width() * height(); }
    Point2 center() const { return {0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)}; }
};

inline Rect to_rect(const BoxGeom& b) { return {b.lo(), b.hi()}; }

}  // namespace ls2d
