#pragma once
// Two-sided sequences of torus maps under finite presentations, the
// cocycle composition law, block gathering, and the uniform metrics.

#include <vector>

#include "anosov/diffeo.hpp"

namespace anosov {

inline long floor_mod(long i, long m) {
    long r = i % m;
    if (r < 0) r += m;
    return r;
}

struct Window {
    long lo = 0;
    long hi = 0;

    Window() = default;
    Window(long l, long h) : lo(l), hi(h) {
        if (lo > hi) throw std::invalid_argument("Window: lo <= hi required");
    }
    long length() const { return hi - lo + 1; }
    bool contains(long i) const { return i >= lo && i <= hi; }
};

// A Z-indexed family of torus maps. Presentations:
//   Constant: one map at every index.
//   Periodic: maps[i mod P].
//   Word: explicit core over [core_start, core_start + core.size() - 1],
//         with cyclic tail patterns on either side (a single-entry tail is
//         the constant-tail case).
class FamilySpec {
  public:
    enum class Presentation { Constant, Periodic, Word };

    static FamilySpec constant(TorusMap map);
    static FamilySpec periodic(std::vector<TorusMap> maps);
    static FamilySpec word(long core_start, std::vector<TorusMap> core,
                           std::vector<TorusMap> left_tail,
                           std::vector<TorusMap> right_tail);

    Presentation presentation() const { return pres_; }
    // 1 for constant, the list length for periodic, 0 for word.
    long period() const;

    const TorusMap& map_at(long i) const;

    long core_start() const { return core_start_; }
    long core_end() const { return core_start_ + static_cast<long>(maps_.size()) - 1; }
    const std::vector<TorusMap>& maps() const { return maps_; }
    const std::vector<TorusMap>& left_tail() const { return left_; }
    const std::vector<TorusMap>& right_tail() const { return right_; }

    bool all_linear() const;

    // Canonical key identifying map_at(i) up to the presentation's
    // repetition structure; equal keys mean identical maps.
    long representative_key(long i) const;

  private:
    FamilySpec() = default;
    Presentation pres_ = Presentation::Constant;
    std::vector<TorusMap> maps_;   // constant: size 1; periodic: size P; word: core
    long core_start_ = 0;          // word only
    std::vector<TorusMap> left_;   // word only, cycled leftward from the core
    std::vector<TorusMap> right_;  // word only, cycled rightward from the core
};

struct CocycleResult {
    TorusPoint point;
    Mat2 jacobian;
};

// n-step composition starting at index i: forward maps f_{i+n-1} o ... o f_i
// for n > 0, inverse maps f_{i+n}^-1 o ... o f_{i-1}^-1 for n < 0, identity
// for n = 0. The Jacobian is accumulated along the orbit by the chain rule.
CocycleResult compose(const FamilySpec& F, long i, long n, const TorusPoint& x,
                      double tol = 1e-12);

// Block boundaries n_j with n_0 = origin and block lengths cycling through
// block_lengths; gather composes each block into one map of the output
// family (re-indexed by block number).
struct GatherSpec {
    long origin = 0;
    std::vector<long> block_lengths;
};

FamilySpec gather(const FamilySpec& F, const GatherSpec& spec);

// sup over i in window of min{ d^m(f_i, g_i), 1 }.
double d_unif(const FamilySpec& F, const FamilySpec& G, int order, const Window& window,
              int grid_n);

struct C2SupBound {
    double S = 0.0;        // sup over the window of the per-map C^2 norm
    double r_bound = 0.0;  // admissible chart radius 1 / (40 S)
    bool exact = false;    // true when every per-map norm was closed-form
};

C2SupBound c2_sup_bound(const FamilySpec& F, const Window& window, int grid_n = 64);

}  // namespace anosov
