#pragma once
// Bounded families of tangent vector fields over an index window, the
// push-forward operator acting on them, oblique projection onto the
// stable/unstable subbundles, and norm-of-powers estimates that stand in
// for the operator's hyperbolic gap.

#include <functional>
#include <optional>
#include <vector>

#include "anosov/certificate.hpp"
#include "anosov/family.hpp"
#include "anosov/geom.hpp"
#include "anosov/splitting.hpp"
#include "anosov/torus.hpp"

namespace anosov {

// A tangent vector field at one index, stored on a periodic grid_n x grid_n
// lattice with componentwise bilinear interpolation. The sup norm is the
// node maximum, cached at construction; interpolated values never exceed it
// because bilinear weights are convex.
class GridSection {
  public:
    GridSection(long index, int grid_n,
                const std::function<Vec2(const TorusPoint&)>& fn);
    GridSection(long index, int grid_n, std::vector<Vec2> values);

    long index() const { return index_; }
    int grid_n() const { return grid_n_; }
    TorusPoint grid_point(int jx, int jy) const {
        return TorusPoint{static_cast<double>(jx) / grid_n_,
                          static_cast<double>(jy) / grid_n_};
    }
    const Vec2& node(int jx, int jy) const;
    // Bilinear interpolation, periodic in both coordinates.
    Vec2 value(const TorusPoint& p) const;
    double sup_norm() const { return sup_norm_; }

  private:
    std::size_t at(int jx, int jy) const {
        return static_cast<std::size_t>(jy) * static_cast<std::size_t>(grid_n_) +
               static_cast<std::size_t>(jx);
    }
    long index_;
    int grid_n_;
    std::vector<Vec2> values_;
    double sup_norm_ = 0.0;
};

// One grid section per index of a window, normed by the sup over indices.
// An optional radius tag tau certifies that every stored value lies in the
// closed tau-ball; arithmetic results carry no tag.
class SectionFamily {
  public:
    SectionFamily(Window window, int grid_n,
                  const std::function<Vec2(long, const TorusPoint&)>& fn);

    static SectionFamily zero(Window window, int grid_n);
    static SectionFamily constant(Window window, int grid_n, const Vec2& v);
    // Builds from per-index sections with consecutive indices.
    static SectionFamily assemble(std::vector<GridSection> sections);

    const Window& window() const { return window_; }
    int grid_n() const { return grid_n_; }
    bool covers(long i) const { return window_.contains(i); }
    const GridSection& at(long i) const;
    Vec2 value(long i, const TorusPoint& p) const { return at(i).value(p); }
    double norm_inf() const { return norm_inf_; }

    const std::optional<double>& radius_tag() const { return tau_; }
    // Tags membership in the tau-ball; throws std::invalid_argument if any
    // node value exceeds tau in norm.
    SectionFamily& with_radius(double tau);

  private:
    SectionFamily() = default;
    Window window_{0, 0};
    int grid_n_ = 0;
    std::vector<GridSection> sections_;
    double norm_inf_ = 0.0;
    std::optional<double> tau_;
};

// Pointwise linear combinations; windows and grids must match exactly.
SectionFamily operator+(const SectionFamily& a, const SectionFamily& b);
SectionFamily operator-(const SectionFamily& a, const SectionFamily& b);
SectionFamily operator*(double s, const SectionFamily& a);

// Sup over indices and nodes of the distance between a node value and the
// mean of its four lattice neighbours: an a-posteriori surrogate for the
// bilinear interpolation error, decaying like grid_n^-2 for smooth fields.
double interpolation_slack(const SectionFamily& Z);

// Push-forward: (FZ)_i(p) = Df_{i-1}(q) Z_{i-1}(q) with q = f_{i-1}^{-1}(p);
// preimages by Newton inversion, values by interpolation. The output window
// is Z's window shifted up by one.
SectionFamily pushforward(const FamilySpec& F, const SectionFamily& Z);

// Inverse push-forward: (F^{-1}Z)_i(p) = Df_i(p)^{-1} Z_{i+1}(f_i(p));
// the output window is Z's window shifted down by one.
SectionFamily pushforward_inverse(const FamilySpec& F, const SectionFamily& Z);

struct ProjectedSections {
    SectionFamily stable;
    SectionFamily unstable;
    // Max over nodes of ||component|| / ||Z||_inf, both components; finite
    // precisely because the splitting angle is bounded below.
    double k_bound = 0.0;
};

// Oblique pointwise projection onto span(e^s) along span(e^u) and vice
// versa; stable + unstable reconstructs Z up to rounding. Throws
// std::domain_error when the sampled splitting angle falls below
// angle_threshold (the projection is ill-conditioned there).
ProjectedSections project_su(const SectionFamily& Z, const SplittingField& S,
                             double angle_threshold = 1e-3);

// Norm-of-powers estimate for the push-forward restricted to a subbundle:
// stable measures the forward n-step cocycle stretch along e^s, unstable
// the backward (inverse-power) stretch along e^u. The maximum runs over
// grid nodes and over start indices whose whole n-step orbit stays inside
// the window; the n-th root of the worst stretch is returned. Stretches
// are accumulated as products of single-step factors re-anchored to the
// field at every step, which is exact for invariant fields and immune to
// cross-subbundle rounding drift.
double power_norm_estimate(const FamilySpec& F, const SplittingField& S,
                           Subbundle t, int n, Window window);

// Hyperbolic-gap surrogate: certified iff both restricted power estimates
// sit below 1 - margin, the sampled splitting angles stay above the
// threshold (bounded projections), and the sampled C^2 sup is finite.
// Failure modes are recorded as notes: gap-failure, angle-failure,
// derivative-unbounded.
Certificate hyperbolic_gap_report(const FamilySpec& F, const SplittingField& S,
                                  int n, Window window, double margin = 1e-6,
                                  double angle_threshold = 1e-3);

}  // namespace anosov
