#pragma once
// Points on the flat unit 2-torus R^2/Z^2 and the exponential charts.
// The injectivity radius is 1/2: displacement representatives in
// [-1/2, 1/2)^2 are unique, and |log_map(p, q)| equals the distance
// whenever d(p, q) < 1/2.

#include <cmath>
#include <stdexcept>

#include "anosov/geom.hpp"

namespace anosov {

// Fold a real number into [0, 1).
inline double wrap_unit(double t) {
    double r = t - std::floor(t);
    if (r >= 1.0) r -= 1.0;  // guards t = -eps rounding to 1.0
    return r;
}

// Fold a real number into [-1/2, 1/2): the nearest-representative offset.
inline double wrap_half(double t) {
    double r = t - std::floor(t + 0.5);
    if (r >= 0.5) r -= 1.0;
    return r;
}

struct TorusPoint {
    double x = 0.0;
    double y = 0.0;

    TorusPoint() = default;
    TorusPoint(double xx, double yy) : x(wrap_unit(xx)), y(wrap_unit(yy)) {}

    static TorusPoint from_wrapped(double xx, double yy) {
        TorusPoint p;
        p.x = xx;
        p.y = yy;
        return p;
    }
};

// Shortest displacement from p to q (equivalently the minimum over the
// nine lattice translates of q - p).
inline Vec2 displacement(const TorusPoint& p, const TorusPoint& q) {
    return {wrap_half(q.x - p.x), wrap_half(q.y - p.y)};
}

inline double dist(const TorusPoint& p, const TorusPoint& q) {
    return displacement(p, q).norm();
}

inline TorusPoint exp_map(const TorusPoint& p, const Vec2& v) {
    return TorusPoint{p.x + v.x, p.y + v.y};
}

// Inverse of exp_map on the injectivity ball. Throws if p and q are not
// within chart range (d >= 1/2).
inline Vec2 log_map(const TorusPoint& p, const TorusPoint& q) {
    const Vec2 v = displacement(p, q);
    if (v.norm() >= 0.5)
        throw std::domain_error("log_map: points out of chart range (d(p,q) >= 1/2)");
    return v;
}

}  // namespace anosov
