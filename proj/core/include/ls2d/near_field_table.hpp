#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "ls2d/basis.hpp"
#include "ls2d/common.hpp"
#include "ls2d/dd.hpp"
#include "ls2d/special_functions.hpp"

namespace ls2d {

enum class NearRelation { Colleague, Coarse, Fine };

const char* relation_name(NearRelation r);

/// Neighbor-slot geometry relative to the unit source box, Fig-style
/// numbering: colleagues row-major (self = slot 4), coarse/fine
/// counterclockwise from the lower-left corner.
struct NearSlot {
    Point2 center;
    double side;
};
const std::vector<NearSlot>& near_slots(NearRelation r);

/// Wavenumber-independent moment tables over the unit box U = [-1/2, 1/2]^2:
///   power[t][l][m]  = int_U (r_t/2)^{2m}             b_l(arg(y)) dy
///   logpow[t][l][m] = int_U (r_t/2)^{2m} log(r_t/2)  b_l(arg(y)) dy
/// where r_t = |t - y|. For child-split tables the integrals run over each
/// child rescaled to U, targets are child-relative (t_c = 2 (t - s_c)) and
/// arg(y) = y/2 + s_c keeps the basis tied to the parent box.
/// Stored in double-double; the *_lo blocks hold the low words.
struct NearFieldTable {
    NearRelation relation = NearRelation::Colleague;
    bool child_split = false;
    int p = 0;
    int n_basis = 0;
    int pmax = 0;
    int n_slots = 0;
    int n_targets = 0;  // p^2 * n_slots * (child_split ? 4 : 1)

    std::vector<double> power_hi, power_lo;
    std::vector<double> logpow_hi, logpow_lo;

    std::size_t idx(int t, int l, int m) const {
        return (static_cast<std::size_t>(t) * n_basis + l) * (pmax + 1) + m;
    }
    /// child = -1 for unsplit tables
    int target_index(int child, int slot, int g) const;
    DD power(int t, int l, int m) const { return {power_hi[idx(t, l, m)], power_lo[idx(t, l, m)]}; }
    DD logpow(int t, int l, int m) const {
        return {logpow_hi[idx(t, l, m)], logpow_lo[idx(t, l, m)]};
    }
};

/// Builds the full table by graded-panel Gauss quadrature in double-double.
/// Every stored moment is accurate to ~1e-25 absolute relative to its scale.
NearFieldTable build_near_table(NearRelation relation, int p, int pmax, bool child_split,
                                int nthreads = 0);

/// V^kappa_{il} from a table entry:
///   (i L_B^2 / 4) [ sum_m c_m(kL) power + sum_m d_m(kL) logpow ].
/// For unsplit tables kappaL must be <= 4 (child-split required above) and
/// L_B / coeffs refer to the source box. For child-split tables the call is
/// per child: target_index is child-relative, kappaL and L_B are the child's,
/// and the full entry is the sum over the four children.
Complex near_entry(const NearFieldTable& table, int target_index, int l, double kappaL,
                   const HankelSeriesCoeffs& coeffs, double L_B);

/// Full V^kappa_{il} for a (slot, grid) target, dispatching on child_split.
Complex near_entry_total(const NearFieldTable& table, int slot, int g, int l, double kappaL,
                         double L_B);

/// Cache file IO. Format: ASCII header
///   "LSTAB1 p N_p pmax relation child_split grid_kind\n"
/// then little-endian f64 arrays in [target][l][m] order, power block then
/// logpow block, then an 8-byte FNV-1a checksum of the payload. The low
/// words are persisted in a sidecar "<path>.lo" of the same format.
void save_near_table(const NearFieldTable& table, const std::string& path);
NearFieldTable load_near_table(const std::string& path);

/// Directory-backed cache keyed by (p, pmax, relation, child_split, grid kind).
/// An empty directory string disables persistence (build-only).
class TableCache {
  public:
    explicit TableCache(std::string dir = "", int nthreads = 0)
        : dir_(std::move(dir)), nthreads_(nthreads) {}

    std::shared_ptr<const NearFieldTable> get(NearRelation relation, int p, int pmax,
                                              bool child_split);

  private:
    std::string dir_;
    int nthreads_;
    std::mutex mutex_;
    std::unordered_map<std::string, std::shared_ptr<const NearFieldTable>> memo_;
};

std::string near_table_filename(NearRelation relation, int p, int pmax, bool child_split);

}  // namespace ls2d
