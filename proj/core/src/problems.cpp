#include "ls2d/problems.hpp"

#include <cmath>

#include "ls2d/special_functions.hpp"

namespace ls2d {

ProblemId problem_id_from_string(const std::string& name) {
    if (name == "gaussian") return ProblemId::Gaussian;
    if (name == "flatbump") return ProblemId::FlatBump;
    if (name == "multibump") return ProblemId::MultiBump;
    if (name == "plasma") return ProblemId::Plasma;
    if (name == "custom") return ProblemId::Custom;
    throw ConfigError("unknown problem id: " + name);
}

const char* problem_id_name(ProblemId id) {
    switch (id) {
        case ProblemId::Gaussian: return "gaussian";
        case ProblemId::FlatBump: return "flatbump";
        case ProblemId::MultiBump: return "multibump";
        case ProblemId::Plasma: return "plasma";
        case ProblemId::Custom: return "custom";
    }
    return "?";
}

Complex incident_wave(double kappa, Point2 x) { return std::exp(Complex(0.0, kappa * x.x)); }

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double unit_double(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

struct PlasmaParams {
    double a, x, y;
};
constexpr PlasmaParams kPlasma[5] = {
    {0.45, 0.80, 0.00}, {0.195, 0.54, -0.28}, {0.51, -0.14, 0.70},
    {0.195, -0.50, -0.01}, {0.63, 0.18, 0.80},
};

double plasma_contrast(Point2 pt) {
    const double x = pt.x, y = pt.y;
    const double C = 0.4987;
    const double psi =
        1.0 - std::pow(x - 0.15 * (1.0 - x * x), 2) - C * std::pow(1.0 + 0.3 * x, 2) * y * y;
    if (psi <= 0.05) return 0.0;
    double g = 0.0;
    for (const PlasmaParams& b : kPlasma) {
        const double d2 = std::pow(x - b.x, 2) + std::pow(y - b.y, 2);
        g += b.a * std::exp(-d2 / 0.01);
    }
    return -1.5 * (psi - 0.05) - g * std::cos(0.9 * y);
}

}  // namespace

std::vector<Point2> multibump_centers(std::uint64_t seed) {
    std::uint64_t state = seed;
    std::vector<Point2> centers(20);
    for (Point2& c : centers) {
        c.x = -1.5 + 3.0 * unit_double(splitmix64(state));
        c.y = -1.5 + 3.0 * unit_double(splitmix64(state));
    }
    return centers;
}

RealField make_contrast(const ProblemSpec& spec) {
    switch (spec.id) {
        case ProblemId::Gaussian:
            return [](Point2 x) { return 1.5 * std::exp(-160.0 * norm2(x)); };
        case ProblemId::FlatBump:
            return [](Point2 x) { return 0.5 * erfc(5.0 * (norm2(x) - 1.0)); };
        case ProblemId::MultiBump: {
            auto centers = multibump_centers(spec.seed);
            const double a = 0.0013;
            return [centers, a](Point2 x) {
                double q = 0.0;
                for (Point2 c : centers) q += 1.5 * std::exp(-norm2(x - c) / a);
                return q;
            };
        }
        case ProblemId::Plasma:
            return plasma_contrast;
        case ProblemId::Custom:
            if (!spec.custom_q) throw ConfigError("custom problem requires custom_q");
            return spec.custom_q;
    }
    throw ConfigError("make_contrast: bad problem id");
}

ScalarField make_rhs(double kappa, RealField q) {
    return [kappa, q = std::move(q)](Point2 x) {
        return -kappa * kappa * q(x) * incident_wave(kappa, x);
    };
}

}  // namespace ls2d
