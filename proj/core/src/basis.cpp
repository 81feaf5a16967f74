#include "ls2d/basis.hpp"

#include <array>
#include <cmath>

namespace ls2d {

BasisSpec make_basis(int p) {
    if (p < 4 || p % 2 != 0) throw ConfigError("basis order p must be even and >= 4");
    BasisSpec spec;
    spec.p = p;
    spec.kind = p == 4 ? BasisKind::Monomial : BasisKind::Chebyshev;
    spec.n_basis = p * (p + 1) / 2;
    spec.exponents.reserve(spec.n_basis);
    for (int deg = 0; deg < p; ++deg)
        for (int a = 0; a <= deg; ++a) spec.exponents.emplace_back(a, deg - a);
    return spec;
}

namespace {

template <typename T>
T cheb_t(int n, T x) {
    if (n == 0) return T(1.0);
    T tm(1.0), tc = x;
    for (int k = 1; k < n; ++k) {
        T tn = 2.0 * (x * tc) - tm;
        tm = tc;
        tc = tn;
    }
    return tc;
}

template <typename T>
T pow_int(T x, int a) {
    T r(1.0);
    for (int k = 0; k < a; ++k) r = r * x;
    return r;
}

template <typename T>
T eval_one(const BasisSpec& spec, int l, T xi1, T xi2) {
    if (l < 1 || l > spec.n_basis) throw ConfigError("basis index out of range");
    auto [a, b] = spec.exponents[l - 1];
    if (spec.kind == BasisKind::Monomial) return pow_int(xi1, a) * pow_int(xi2, b);
    return cheb_t(a, 2.0 * xi1) * cheb_t(b, 2.0 * xi2);
}

template <typename T>
void eval_all(const BasisSpec& spec, T xi1, T xi2, T* out) {
    const int p = spec.p;
    // 1D tables up to degree p-1, then gather; stack buffers keep this
    // allocation-free on the table-generation hot path
    if (p > 16) throw ConfigError("basis order p > 16 not supported");
    std::array<T, 16> u, v;
    if (spec.kind == BasisKind::Monomial) {
        u[0] = T(1.0);
        v[0] = T(1.0);
        for (int k = 1; k < p; ++k) {
            u[k] = u[k - 1] * xi1;
            v[k] = v[k - 1] * xi2;
        }
    } else {
        T x = 2.0 * xi1, y = 2.0 * xi2;
        u[0] = T(1.0);
        v[0] = T(1.0);
        if (p > 1) {
            u[1] = x;
            v[1] = y;
        }
        for (int k = 2; k < p; ++k) {
            u[k] = 2.0 * (x * u[k - 1]) - u[k - 2];
            v[k] = 2.0 * (y * v[k - 1]) - v[k - 2];
        }
    }
    for (int l = 0; l < spec.n_basis; ++l) {
        auto [a, b] = spec.exponents[l];
        out[l] = u[a] * v[b];
    }
}

}  // namespace

double basis_eval(const BasisSpec& spec, int l, double xi1, double xi2) {
    return eval_one<double>(spec, l, xi1, xi2);
}

DD basis_eval_dd(const BasisSpec& spec, int l, DD xi1, DD xi2) {
    return eval_one<DD>(spec, l, xi1, xi2);
}

void basis_eval_all(const BasisSpec& spec, double xi1, double xi2, double* out) {
    eval_all<double>(spec, xi1, xi2, out);
}

void basis_eval_all_dd(const BasisSpec& spec, DD xi1, DD xi2, DD* out) {
    eval_all<DD>(spec, xi1, xi2, out);
}

std::vector<double> grid_coords_1d(int p) {
    std::vector<double> x(p);
    if (p == 4) {
        for (int k = 0; k < p; ++k) x[k] = (k + 0.5) / p - 0.5;
    } else {
        // first-kind Chebyshev roots, ascending, scaled to [-1/2, 1/2]
        for (int k = 0; k < p; ++k) x[k] = -0.5 * std::cos(kPi * (2 * k + 1) / (2.0 * p));
    }
    return x;
}

std::vector<Point2> unit_grid_points(int p) {
    std::vector<double> x = grid_coords_1d(p);
    std::vector<Point2> pts;
    pts.reserve(p * p);
    for (int iy = 0; iy < p; ++iy)
        for (int ix = 0; ix < p; ++ix) pts.push_back({x[ix], x[iy]});
    return pts;
}

InterpOperator build_interp(const BasisSpec& spec, const std::vector<Point2>& grid) {
    const int np = static_cast<int>(grid.size());
    InterpOperator op;
    op.spec = spec;
    op.Q.resize(np, spec.n_basis);
    std::vector<double> row(spec.n_basis);
    for (int i = 0; i < np; ++i) {
        basis_eval_all(spec, grid[i].x, grid[i].y, row.data());
        for (int l = 0; l < spec.n_basis; ++l) op.Q(i, l) = row[l];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(op.Q, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    op.sigma_max = s(0);
    const double cutoff = 1e-12 * op.sigma_max;
    int rank = 0;
    for (int k = 0; k < s.size(); ++k)
        if (s(k) > cutoff) ++rank;
    op.sigma_min = s(rank - 1);
    if (op.sigma_min < 1e-10 * op.sigma_max || rank < spec.n_basis)
        throw NumericsError("build_interp: rank-deficient grid/basis pairing (sigma_min/sigma_max = " +
                            std::to_string(op.sigma_min / op.sigma_max) + ")");
    Eigen::VectorXd inv = s.head(rank).cwiseInverse();
    op.Qdag = svd.matrixV().leftCols(rank) * inv.asDiagonal() *
              svd.matrixU().leftCols(rank).transpose();
    return op;
}

InterpOperator build_interp(int p) {
    BasisSpec spec = make_basis(p);
    return build_interp(spec, unit_grid_points(p));
}

}  // namespace ls2d
