#include "anosov/splitting.hpp"

#include <cmath>
#include <stdexcept>

namespace anosov {

Vec2 canonical_direction(const Vec2& v) {
    const double n = v.norm();
    if (!(n > 0.0))
        throw std::invalid_argument("canonical_direction: zero direction");
    Vec2 u = v * (1.0 / n);
    if (u.x < 0.0 || (u.x == 0.0 && u.y < 0.0)) u = -u;
    return u;
}

SplittingField::SplittingField(
    Window window, int grid_n,
    const std::function<FramePair(long, const TorusPoint&)>& fn)
    : window_(window), grid_n_(grid_n) {
    if (grid_n < 2)
        throw std::invalid_argument("SplittingField: grid_n >= 2 required");
    const std::size_t count = static_cast<std::size_t>(window.length());
    stable_.resize(count);
    unstable_.resize(count);
    for (long i = window.lo; i <= window.hi; ++i) {
        auto& s = stable_[idx(i)];
        auto& u = unstable_[idx(i)];
        s.resize(static_cast<std::size_t>(grid_n) * grid_n);
        u.resize(static_cast<std::size_t>(grid_n) * grid_n);
        for (int jy = 0; jy < grid_n; ++jy)
            for (int jx = 0; jx < grid_n; ++jx) {
                const FramePair f = fn(i, grid_point(jx, jy));
                s[node(jx, jy)] = canonical_direction(f.stable);
                u[node(jx, jy)] = canonical_direction(f.unstable);
            }
    }
}

SplittingField SplittingField::constant(Window window, int grid_n,
                                        const Vec2& es, const Vec2& eu) {
    return SplittingField(window, grid_n,
                          [&](long, const TorusPoint&) {
                              return FramePair{es, eu};
                          });
}

SplittingField SplittingField::from_data(const SplittingData& data, int grid_n) {
    return SplittingField(data.window, grid_n,
                          [&](long i, const TorusPoint&) {
                              return FramePair{data.s[data.idx(i)],
                                               data.u[data.idx(i)]};
                          });
}

SplittingField SplittingField::from_data(const SplittingData& data, int grid_n,
                                         Window target) {
    const long span = data.window.hi - data.window.lo + 1;
    return SplittingField(target, grid_n, [&](long i, const TorusPoint&) {
        const long j = data.window.lo + floor_mod(i - data.window.lo, span);
        return FramePair{data.s[data.idx(j)], data.u[data.idx(j)]};
    });
}

const Vec2& SplittingField::stable_node(long i, int jx, int jy) const {
    if (!covers(i))
        throw std::out_of_range("SplittingField: index outside window");
    return stable_[idx(i)][node(jx, jy)];
}

const Vec2& SplittingField::unstable_node(long i, int jx, int jy) const {
    if (!covers(i))
        throw std::out_of_range("SplittingField: index outside window");
    return unstable_[idx(i)][node(jx, jy)];
}

Vec2 SplittingField::interpolate(const std::vector<Vec2>& field,
                                 const TorusPoint& p) const {
    const double gx = p.x * grid_n_;
    const double gy = p.y * grid_n_;
    const int jx = static_cast<int>(std::floor(gx)) % grid_n_;
    const int jy = static_cast<int>(std::floor(gy)) % grid_n_;
    const double tx = gx - std::floor(gx);
    const double ty = gy - std::floor(gy);
    const int jx1 = (jx + 1) % grid_n_;
    const int jy1 = (jy + 1) % grid_n_;

    // Doubled-angle image of a unit direction (x, y) is the complex square
    // (x^2 - y^2, 2xy); antipodal directions coincide there.
    const auto doubled = [](const Vec2& d) {
        return Vec2{d.x * d.x - d.y * d.y, 2.0 * d.x * d.y};
    };
    const Vec2 w00 = doubled(field[node(jx, jy)]);
    const Vec2 w10 = doubled(field[node(jx1, jy)]);
    const Vec2 w01 = doubled(field[node(jx, jy1)]);
    const Vec2 w11 = doubled(field[node(jx1, jy1)]);
    const Vec2 w = w00 * ((1 - tx) * (1 - ty)) + w10 * (tx * (1 - ty)) +
                   w01 * ((1 - tx) * ty) + w11 * (tx * ty);
    const double half = 0.5 * std::atan2(w.y, w.x);
    return canonical_direction(Vec2{std::cos(half), std::sin(half)});
}

Vec2 SplittingField::stable(long i, const TorusPoint& p) const {
    if (!covers(i))
        throw std::out_of_range("SplittingField: index outside window");
    return interpolate(stable_[idx(i)], p);
}

Vec2 SplittingField::unstable(long i, const TorusPoint& p) const {
    if (!covers(i))
        throw std::out_of_range("SplittingField: index outside window");
    return interpolate(unstable_[idx(i)], p);
}

Mat2 SplittingField::frame(long i, const TorusPoint& p) const {
    const Vec2 es = stable(i, p);
    const Vec2 eu = unstable(i, p);
    return Mat2{es.x, eu.x, es.y, eu.y};
}

Vec2 SplittingField::components(long i, const TorusPoint& p, const Vec2& v) const {
    return frame(i, p).inverse() * v;
}

double SplittingField::min_angle() const {
    double best = 2.0;  // > pi/2
    for (std::size_t k = 0; k < stable_.size(); ++k)
        for (std::size_t m = 0; m < stable_[k].size(); ++m)
            best = std::min(best, line_angle(stable_[k][m], unstable_[k][m]));
    return best;
}

AngleReport angle_property(const SplittingField& S, double threshold) {
    AngleReport r;
    r.min_angle = S.min_angle();
    r.spa = r.min_angle >= threshold;
    return r;
}

}  // namespace anosov
