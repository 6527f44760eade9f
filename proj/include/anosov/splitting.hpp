#pragma once
// Continuous stable/unstable direction fields over a window of indices.
// Directions are lines, not vectors: storage canonicalises the sign and
// interpolation runs on the doubled-angle representation so antipodal
// representatives never cancel.

#include <functional>
#include <utility>
#include <vector>

#include "anosov/family.hpp"
#include "anosov/geom.hpp"
#include "anosov/multiplicative.hpp"
#include "anosov/torus.hpp"

namespace anosov {

struct FramePair {
    Vec2 stable;
    Vec2 unstable;
};

enum class Subbundle { Stable, Unstable };

class SplittingField {
  public:
    // fn(i, p) supplies the (possibly unnormalised) directions at each node.
    SplittingField(Window window, int grid_n,
                   const std::function<FramePair(long, const TorusPoint&)>& fn);

    static SplittingField constant(Window window, int grid_n, const Vec2& es,
                                   const Vec2& eu);
    // Per-index constant field from continued-fraction frame data.
    static SplittingField from_data(const SplittingData& data, int grid_n);
    // Same, tiled periodically onto a larger window; the data window must
    // span a whole number of periods of the underlying family.
    static SplittingField from_data(const SplittingData& data, int grid_n,
                                    Window target);

    const Window& window() const { return window_; }
    int grid_n() const { return grid_n_; }
    TorusPoint grid_point(int jx, int jy) const {
        return TorusPoint{static_cast<double>(jx) / grid_n_,
                          static_cast<double>(jy) / grid_n_};
    }

    // Stored node values (unit, canonical sign).
    const Vec2& stable_node(long i, int jx, int jy) const;
    const Vec2& unstable_node(long i, int jx, int jy) const;

    // Doubled-angle bilinear interpolation, renormalised; periodic in p.
    Vec2 stable(long i, const TorusPoint& p) const;
    Vec2 unstable(long i, const TorusPoint& p) const;
    // Columns [e^s | e^u] at (i, p).
    Mat2 frame(long i, const TorusPoint& p) const;
    // Coordinates (a, b) with v = a e^s + b e^u.
    Vec2 components(long i, const TorusPoint& p, const Vec2& v) const;

    // Minimum unsigned angle between the two stored direction fields over
    // all nodes and indices; spa flags it against the threshold.
    double min_angle() const;

    bool covers(long i) const { return i >= window_.lo && i <= window_.hi; }

  private:
    std::size_t idx(long i) const { return static_cast<std::size_t>(i - window_.lo); }
    std::size_t node(int jx, int jy) const {
        return static_cast<std::size_t>(jy) * static_cast<std::size_t>(grid_n_) +
               static_cast<std::size_t>(jx);
    }
    Vec2 interpolate(const std::vector<Vec2>& field, const TorusPoint& p) const;

    Window window_;
    int grid_n_;
    std::vector<std::vector<Vec2>> stable_;    // [index][node]
    std::vector<std::vector<Vec2>> unstable_;  // [index][node]
};

struct AngleReport {
    double min_angle = 0.0;
    bool spa = false;  // strong property of the angles at the threshold
};

AngleReport angle_property(const SplittingField& S, double threshold = 1e-3);

// Canonical representative of a direction: unit norm, first nonzero
// component positive. Throws on the zero vector.
Vec2 canonical_direction(const Vec2& v);

}  // namespace anosov
