#include "ls2d/near_field_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "ls2d/gauss.hpp"
#include "ls2d/parallel.hpp"

namespace ls2d {

const char* relation_name(NearRelation r) {
    switch (r) {
        case NearRelation::Colleague: return "colleague";
        case NearRelation::Coarse: return "coarse";
        case NearRelation::Fine: return "fine";
    }
    return "?";
}

const std::vector<NearSlot>& near_slots(NearRelation r) {
    static const std::vector<NearSlot> colleague = [] {
        std::vector<NearSlot> s;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) s.push_back({{double(dx), double(dy)}, 1.0});
        return s;
    }();
    static const std::vector<NearSlot> fine = [] {
        std::vector<NearSlot> s;
        // counterclockwise ring of half-size boxes, lower-left first
        const double a = 0.75, b = 0.25;
        s.push_back({{-a, -a}, 0.5});
        s.push_back({{-b, -a}, 0.5});
        s.push_back({{b, -a}, 0.5});
        s.push_back({{a, -a}, 0.5});
        s.push_back({{a, -b}, 0.5});
        s.push_back({{a, b}, 0.5});
        s.push_back({{a, a}, 0.5});
        s.push_back({{b, a}, 0.5});
        s.push_back({{-b, a}, 0.5});
        s.push_back({{-a, a}, 0.5});
        s.push_back({{-a, b}, 0.5});
        s.push_back({{-a, -b}, 0.5});
        return s;
    }();
    static const std::vector<NearSlot> coarse = [] {
        std::vector<NearSlot> s;
        const double a = 1.5, b = 0.5;
        s.push_back({{-a, -a}, 2.0});
        s.push_back({{-b, -a}, 2.0});
        s.push_back({{b, -a}, 2.0});
        s.push_back({{a, -a}, 2.0});
        s.push_back({{a, -b}, 2.0});
        s.push_back({{a, b}, 2.0});
        s.push_back({{a, a}, 2.0});
        s.push_back({{b, a}, 2.0});
        s.push_back({{-b, a}, 2.0});
        s.push_back({{-a, a}, 2.0});
        s.push_back({{-a, b}, 2.0});
        s.push_back({{-a, -b}, 2.0});
        return s;
    }();
    switch (r) {
        case NearRelation::Colleague: return colleague;
        case NearRelation::Coarse: return coarse;
        case NearRelation::Fine: return fine;
    }
    return colleague;
}

int NearFieldTable::target_index(int child, int slot, int g) const {
    const int p2 = p * p;
    if (child_split) return (child * n_slots + slot) * p2 + g;
    return slot * p2 + g;
}

namespace {

// Accumulates the full (l, m) moment set contribution of one quadrature point.
// m_hi limits the accumulated orders on panels whose (r/2)^{2m} contribution
// is negligible beyond m_hi (far-corner panels carry the full range).
struct MomentAccumulator {
    int n_basis;
    int pmax;
    std::vector<DD> power;   // [l][m]
    std::vector<DD> logpow;
    std::vector<DD> bl;      // basis values scratch
    std::vector<DD> pw;      // (r/2)^{2m} scratch

    MomentAccumulator(int nb, int pm)
        : n_basis(nb), pmax(pm), power(nb * (pm + 1)), logpow(nb * (pm + 1)), bl(nb),
          pw(pm + 1) {}

    std::size_t at(int l, int m) const { return static_cast<std::size_t>(l) * (pmax + 1) + m; }

    void add_point(std::vector<DD>& sink, int m_hi, const BasisSpec& basis, Point2 target, DD ux,
                   DD uy, DD w, bool with_log, double arg_scale, Point2 arg_shift) {
        DD dx = DD(target.x) - ux, dy = DD(target.y) - uy;
        DD s = (dx * dx + dy * dy) * 0.25;  // (r/2)^2
        if (with_log) w = w * (dd_log(s) * 0.5);
        basis_eval_all_dd(basis, ux * arg_scale + arg_shift.x, uy * arg_scale + arg_shift.y,
                          bl.data());
        DD q(1.0);
        for (int m = 0; m <= m_hi; ++m) {
            pw[m] = q * w;
            q = q * s;
        }
        for (int l = 0; l < n_basis; ++l) {
            const DD b = bl[l];
            DD* row = sink.data() + at(l, 0);
            for (int m = 0; m <= m_hi; ++m) row[m] += pw[m] * b;
        }
    }
};

// Tensor Gauss over a rectangle, feeding point callbacks in dd.
template <typename F>
void dd_tensor_rule(Rect r, int order, F&& point_fn) {
    const GaussRuleDD& g = gauss_legendre_dd(order);
    DD cx = (DD(r.lo.x) + DD(r.hi.x)) * 0.5, hx = (DD(r.hi.x) - DD(r.lo.x)) * 0.5;
    DD cy = (DD(r.lo.y) + DD(r.hi.y)) * 0.5, hy = (DD(r.hi.y) - DD(r.lo.y)) * 0.5;
    DD jac = hx * hy;
    for (int i = 0; i < order; ++i) {
        DD ux = cx + hx * g.x[i];
        for (int j = 0; j < order; ++j) {
            DD uy = cy + hy * g.x[j];
            point_fn(ux, uy, g.w[i] * g.w[j] * jac);
        }
    }
}

struct LogPanel {
    Rect rect;
    int m_hi;  // orders accumulated on this panel
};

double rect_dist(const Rect& r, Point2 t) {
    const double dx = std::max({r.lo.x - t.x, t.x - r.hi.x, 0.0});
    const double dy = std::max({r.lo.y - t.y, t.y - r.hi.y, 0.0});
    return std::hypot(dx, dy);
}

double rect_max_dist(const Rect& r, Point2 t) {
    const double dx = std::max(std::abs(r.lo.x - t.x), std::abs(r.hi.x - t.x));
    const double dy = std::max(std::abs(r.lo.y - t.y), std::abs(r.hi.y - t.y));
    return std::hypot(dx, dy);
}

// Graded binary partition of U for the log family. Panels are split until
//  (a) diam <= 0.7 * dist(panel, target): the log factor is analytic with a
//      comfortable Bernstein ellipse, and
//  (b) the active power orders resolve: m_cut * log(r_max/r_min) <= 7, where
//      m_cut is the largest order whose mass on this panel is not negligible
//      relative to the moment's global scale (set by r over the whole box).
std::vector<LogPanel> log_panels(Point2 t, int pmax) {
    const Rect box{{-0.5, -0.5}, {0.5, 0.5}};
    const double r_box = rect_max_dist(box, t);
    auto m_cut = [&](double r_hi) {
        const double ratio = r_box / std::max(r_hi, 1e-300);
        if (ratio <= 1.0) return pmax;
        const double m = 19.6 / (2.0 * std::log(ratio));  // (r_hi/r_box)^{2m} ~ 1e-17
        return std::min(pmax, static_cast<int>(m) + 8);
    };

    std::vector<LogPanel> out;
    std::vector<Rect> stack{box};
    const double min_size = 1.5e-11;
    while (!stack.empty()) {
        Rect r = stack.back();
        stack.pop_back();
        const double d0 = rect_dist(r, t);
        const double d1 = rect_max_dist(r, t);
        const double diam = std::hypot(r.width(), r.height());
        const int mc = m_cut(d1);
        const bool singular_ok = diam <= 0.7 * d0;
        const bool power_ok = mc * std::log(d1 / std::max(d0, 1e-12)) <= 7.0;
        if ((singular_ok && power_ok) || std::max(r.width(), r.height()) <= min_size) {
            out.push_back({r, mc});
            continue;
        }
        if (r.width() >= r.height()) {
            const double cx = 0.5 * (r.lo.x + r.hi.x);
            stack.push_back({{r.lo.x, r.lo.y}, {cx, r.hi.y}});
            stack.push_back({{cx, r.lo.y}, {r.hi.x, r.hi.y}});
        } else {
            const double cy = 0.5 * (r.lo.y + r.hi.y);
            stack.push_back({{r.lo.x, r.lo.y}, {r.hi.x, cy}});
            stack.push_back({{r.lo.x, cy}, {r.hi.x, r.hi.y}});
        }
    }
    return out;
}

void compute_target_moments(const BasisSpec& basis, Point2 target, double arg_scale,
                            Point2 arg_shift, int pmax, MomentAccumulator& acc) {
    // power family: the integrand is a polynomial of degree 2 pmax + p - 1;
    // one tensor rule of matching order integrates it exactly
    const int n_pow = pmax + basis.p / 2 + 2;
    dd_tensor_rule(Rect{{-0.5, -0.5}, {0.5, 0.5}}, n_pow, [&](DD ux, DD uy, DD w) {
        acc.add_point(acc.power, pmax, basis, target, ux, uy, w, false, arg_scale, arg_shift);
    });
    // log family: graded panels, truncated order per panel
    for (const LogPanel& panel : log_panels(target, pmax)) {
        dd_tensor_rule(panel.rect, 22, [&](DD ux, DD uy, DD w) {
            acc.add_point(acc.logpow, panel.m_hi, basis, target, ux, uy, w, true, arg_scale,
                          arg_shift);
        });
    }
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

const char* grid_kind_name(int p) { return p == 4 ? "uniform" : "cheb"; }

void write_block(std::ostream& os, const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void save_one(const NearFieldTable& t, const std::string& path, bool lo_words) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("save_near_table: cannot open " + path);
    os << "LSTAB1 " << t.p << ' ' << t.n_basis << ' ' << t.pmax << ' '
       << relation_name(t.relation) << ' ' << (t.child_split ? 1 : 0) << ' '
       << grid_kind_name(t.p) << '\n';
    const std::vector<double>& a = lo_words ? t.power_lo : t.power_hi;
    const std::vector<double>& b = lo_words ? t.logpow_lo : t.logpow_hi;
    write_block(os, a);
    write_block(os, b);
    std::uint64_t h = fnv1a(a.data(), a.size() * sizeof(double), 1469598103934665603ULL);
    h = fnv1a(b.data(), b.size() * sizeof(double), h);
    os.write(reinterpret_cast<const char*>(&h), sizeof(h));
    if (!os) throw ConfigError("save_near_table: write failed for " + path);
}

void load_one(const std::string& path, NearFieldTable& t, bool lo_words) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("load_near_table: cannot open " + path);
    std::string magic, relation, grid;
    int p = 0, nb = 0, pmax = 0, split = 0;
    is >> magic >> p >> nb >> pmax >> relation >> split >> grid;
    is.get();  // newline
    if (magic != "LSTAB1") throw ConfigError("load_near_table: bad magic in " + path);
    NearRelation rel;
    if (relation == "colleague")
        rel = NearRelation::Colleague;
    else if (relation == "coarse")
        rel = NearRelation::Coarse;
    else if (relation == "fine")
        rel = NearRelation::Fine;
    else
        throw ConfigError("load_near_table: bad relation in " + path);
    if (!lo_words) {
        t.relation = rel;
        t.child_split = split != 0;
        t.p = p;
        t.n_basis = nb;
        t.pmax = pmax;
        t.n_slots = static_cast<int>(near_slots(rel).size());
        t.n_targets = p * p * t.n_slots * (split ? 4 : 1);
    } else if (t.p != p || t.n_basis != nb || t.pmax != pmax || t.relation != rel ||
               t.child_split != (split != 0)) {
        throw ConfigError("load_near_table: sidecar header mismatch for " + path);
    }
    const std::size_t count = static_cast<std::size_t>(t.n_targets) * nb * (pmax + 1);
    std::vector<double>& a = lo_words ? t.power_lo : t.power_hi;
    std::vector<double>& b = lo_words ? t.logpow_lo : t.logpow_hi;
    a.resize(count);
    b.resize(count);
    is.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(count * sizeof(double)));
    is.read(reinterpret_cast<char*>(b.data()), static_cast<std::streamsize>(count * sizeof(double)));
    std::uint64_t stored = 0;
    is.read(reinterpret_cast<char*>(&stored), sizeof(stored));
    if (!is) throw ConfigError("load_near_table: truncated file " + path);
    std::uint64_t h = fnv1a(a.data(), a.size() * sizeof(double), 1469598103934665603ULL);
    h = fnv1a(b.data(), b.size() * sizeof(double), h);
    if (h != stored) throw ConfigError("load_near_table: checksum mismatch in " + path);
}

}  // namespace

NearFieldTable build_near_table(NearRelation relation, int p, int pmax, bool child_split,
                                int nthreads) {
    if (pmax < 1) throw ConfigError("build_near_table: pmax must be >= 1");
    const BasisSpec basis = make_basis(p);
    const std::vector<NearSlot>& slots = near_slots(relation);
    const std::vector<Point2> grid = unit_grid_points(p);

    NearFieldTable t;
    t.relation = relation;
    t.child_split = child_split;
    t.p = p;
    t.n_basis = basis.n_basis;
    t.pmax = pmax;
    t.n_slots = static_cast<int>(slots.size());
    t.n_targets = p * p * t.n_slots * (child_split ? 4 : 1);
    const std::size_t count = static_cast<std::size_t>(t.n_targets) * t.n_basis * (pmax + 1);
    t.power_hi.assign(count, 0.0);
    t.power_lo.assign(count, 0.0);
    t.logpow_hi.assign(count, 0.0);
    t.logpow_lo.assign(count, 0.0);

    parallel_for(t.n_targets, nthreads, [&](long ti) {
        const int p2 = p * p;
        int rest = static_cast<int>(ti);
        const int g = rest % p2;
        rest /= p2;
        const int slot = child_split ? rest % t.n_slots : rest;
        const int child = child_split ? rest / t.n_slots : -1;

        Point2 target = slots[slot].center + slots[slot].side * grid[g];
        double arg_scale = 1.0;
        Point2 arg_shift{0.0, 0.0};
        if (child_split) {
            target = 2.0 * (target - kChildCenterUnit[child]);
            arg_scale = 0.5;
            arg_shift = kChildCenterUnit[child];
        }
        MomentAccumulator acc(t.n_basis, pmax);
        compute_target_moments(basis, target, arg_scale, arg_shift, pmax, acc);
        for (int l = 0; l < t.n_basis; ++l)
            for (int m = 0; m <= pmax; ++m) {
                const std::size_t k = t.idx(static_cast<int>(ti), l, m);
                const DD pw = acc.power[acc.at(l, m)];
                const DD lg = acc.logpow[acc.at(l, m)];
                t.power_hi[k] = pw.hi;
                t.power_lo[k] = pw.lo;
                t.logpow_hi[k] = lg.hi;
                t.logpow_lo[k] = lg.lo;
            }
    });
    return t;
}

Complex near_entry(const NearFieldTable& table, int target_index, int l, double kappaL,
                   const HankelSeriesCoeffs& coeffs, double L_B) {
    if (!(kappaL > 0.0) || kappaL > 8.0)
        throw NumericsError("near_entry: kappaL out of range (0, 8]");
    if (!table.child_split && kappaL > 4.0)
        throw NumericsError("near_entry: kappaL > 4 requires a child-split table");
    if (target_index < 0 || target_index >= table.n_targets)
        throw ConfigError("near_entry: target index out of range");
    if (l < 0 || l >= table.n_basis) throw ConfigError("near_entry: basis index out of range");
    const int pmax = std::min(table.pmax, coeffs.pmax);

    DD s1(0.0), s2(0.0), s3(0.0);
    const std::size_t base = table.idx(target_index, l, 0);
    for (int m = 0; m <= pmax; ++m) {
        const DD pw{table.power_hi[base + m], table.power_lo[base + m]};
        const DD lg{table.logpow_hi[base + m], table.logpow_lo[base + m]};
        s1 += coeffs.a[m] * pw;
        s2 += coeffs.ha[m] * pw;
        s3 += coeffs.a[m] * lg;
    }
    // V-hat = S1 + (2i/pi)((gamma + log z) S1 - S2 + S3)
    const DD y = ((coeffs.gamma_plus_log_z * s1) - s2 + s3) * (2.0 / kPi);
    const double re = s1.to_double();
    const double im = y.to_double();
    const double pref = 0.25 * L_B * L_B;
    // (i L^2/4)(re + i im) = (L^2/4)(-im + i re)
    return {-pref * im, pref * re};
}

Complex near_entry_total(const NearFieldTable& table, int slot, int g, int l, double kappaL,
                         double L_B) {
    if (!table.child_split) {
        const HankelSeriesCoeffs coeffs = series_coeffs(kappaL, table.pmax);
        return near_entry(table, table.target_index(-1, slot, g), l, kappaL, coeffs, L_B);
    }
    const HankelSeriesCoeffs coeffs = series_coeffs(0.5 * kappaL, table.pmax);
    Complex sum(0.0);
    for (int c = 0; c < 4; ++c)
        sum += near_entry(table, table.target_index(c, slot, g), l, 0.5 * kappaL, coeffs,
                          0.5 * L_B);
    return sum;
}

void save_near_table(const NearFieldTable& table, const std::string& path) {
    save_one(table, path, false);
    save_one(table, path + ".lo", true);
}

NearFieldTable load_near_table(const std::string& path) {
    NearFieldTable t;
    load_one(path, t, false);
    if (std::filesystem::exists(path + ".lo")) {
        load_one(path + ".lo", t, true);
    } else {
        t.power_lo.assign(t.power_hi.size(), 0.0);
        t.logpow_lo.assign(t.logpow_hi.size(), 0.0);
    }
    return t;
}

std::string near_table_filename(NearRelation relation, int p, int pmax, bool child_split) {
    return std::string("near_") + relation_name(relation) + "_p" + std::to_string(p) + "_m" +
           std::to_string(pmax) + (child_split ? "_split" : "_whole") + "_" + grid_kind_name(p) +
           ".tab";
}

std::shared_ptr<const NearFieldTable> TableCache::get(NearRelation relation, int p, int pmax,
                                                      bool child_split) {
    const std::string name = near_table_filename(relation, p, pmax, child_split);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = memo_.find(name);
    if (it != memo_.end()) return it->second;

    std::shared_ptr<const NearFieldTable> table;
    if (!dir_.empty()) {
        const std::string path = (std::filesystem::path(dir_) / name).string();
        if (std::filesystem::exists(path)) {
            table = std::make_shared<NearFieldTable>(load_near_table(path));
        } else {
            auto built = std::make_shared<NearFieldTable>(
                build_near_table(relation, p, pmax, child_split, nthreads_));
            std::filesystem::create_directories(dir_);
            save_near_table(*built, path);
            table = built;
        }
    } else {
        table = std::make_shared<NearFieldTable>(
            build_near_table(relation, p, pmax, child_split, nthreads_));
    }
    memo_.emplace(name, table);
    return table;
}

}  // namespace ls2d
