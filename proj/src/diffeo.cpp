#include "anosov/diffeo.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace anosov {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

void check_mul_overflow(long long v) {
    // Entries beyond ~3e18 would already have overflowed; keep a coarse
    // guard well inside the representable range.
    if (std::llabs(v) > (1LL << 62))
        throw std::overflow_error("IntMat2: product entry overflow");
}

}  // namespace

IntMat2 IntMat2::operator*(const IntMat2& o) const {
    const IntMat2 r{a * o.a + b * o.c, a * o.b + b * o.d,
                    c * o.a + d * o.c, c * o.b + d * o.d};
    check_mul_overflow(r.a);
    check_mul_overflow(r.b);
    check_mul_overflow(r.c);
    check_mul_overflow(r.d);
    return r;
}

Vec2 TrigPerturbation::value(const TorusPoint& p) const {
    Vec2 out;
    for (const TrigMode& m : modes_) {
        const double theta = kTwoPi * (m.k1 * p.x + m.k2 * p.y);
        const double ct = std::cos(theta), st = std::sin(theta);
        out += m.cos_coef * ct + m.sin_coef * st;
    }
    return out;
}

Mat2 TrigPerturbation::jacobian(const TorusPoint& p) const {
    Mat2 out;
    for (const TrigMode& m : modes_) {
        const double theta = kTwoPi * (m.k1 * p.x + m.k2 * p.y);
        const double ct = std::cos(theta), st = std::sin(theta);
        // d/dx_l of (c cos + s sin) = 2 pi k_l (-c sin + s cos)
        const Vec2 g = (-1.0 * m.cos_coef) * st + m.sin_coef * ct;
        out.a += kTwoPi * m.k1 * g.x;
        out.b += kTwoPi * m.k2 * g.x;
        out.c += kTwoPi * m.k1 * g.y;
        out.d += kTwoPi * m.k2 * g.y;
    }
    return out;
}

Tensor222 TrigPerturbation::second(const TorusPoint& p) const {
    Tensor222 out;
    for (const TrigMode& m : modes_) {
        const double theta = kTwoPi * (m.k1 * p.x + m.k2 * p.y);
        const double ct = std::cos(theta), st = std::sin(theta);
        const Vec2 h = (-1.0 * m.cos_coef) * ct + (-1.0 * m.sin_coef) * st;
        const double k[2] = {static_cast<double>(m.k1), static_cast<double>(m.k2)};
        const double comp[2] = {h.x, h.y};
        for (int j = 0; j < 2; ++j)
            for (int l = 0; l < 2; ++l)
                for (int mm = 0; mm < 2; ++mm)
                    out.t[j][l][mm] += kTwoPi * kTwoPi * k[l] * k[mm] * comp[j];
    }
    return out;
}

double TrigPerturbation::value_bound() const {
    double ax = 0.0, ay = 0.0;
    for (const TrigMode& m : modes_) {
        ax += std::hypot(m.cos_coef.x, m.sin_coef.x);
        ay += std::hypot(m.cos_coef.y, m.sin_coef.y);
    }
    return std::hypot(ax, ay);
}

double TrigPerturbation::jacobian_bound() const {
    // Entrywise amplitude bounds, then the Frobenius norm dominates the
    // operator norm.
    double e[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (const TrigMode& m : modes_) {
        const double amp[2] = {std::hypot(m.cos_coef.x, m.sin_coef.x),
                               std::hypot(m.cos_coef.y, m.sin_coef.y)};
        const double k[2] = {std::fabs(static_cast<double>(m.k1)),
                             std::fabs(static_cast<double>(m.k2))};
        for (int j = 0; j < 2; ++j)
            for (int l = 0; l < 2; ++l)
                e[j][l] += kTwoPi * k[l] * amp[j];
    }
    return std::sqrt(e[0][0] * e[0][0] + e[0][1] * e[0][1] +
                     e[1][0] * e[1][0] + e[1][1] * e[1][1]);
}

double TrigPerturbation::second_bound() const {
    double bx = 0.0, by = 0.0;
    for (const TrigMode& m : modes_) {
        const double k2 = static_cast<double>(m.k1) * m.k1 + static_cast<double>(m.k2) * m.k2;
        bx += kTwoPi * kTwoPi * k2 * std::hypot(m.cos_coef.x, m.sin_coef.x);
        by += kTwoPi * kTwoPi * k2 * std::hypot(m.cos_coef.y, m.sin_coef.y);
    }
    return std::hypot(bx, by);
}

TorusDiffeo::TorusDiffeo(const IntMat2& linear, TrigPerturbation pert)
    : lin_(linear), pert_(std::move(pert)) {
    if (lin_.det() != 1)
        throw std::invalid_argument("TorusDiffeo: det(A) = 1 required, got det = " +
                                    std::to_string(lin_.det()));
    A_ = lin_.to_mat2();
    A_inv_ = lin_.inverse_unimodular().to_mat2();
    margin_ = pert_.jacobian_bound() * A_inv_.op_norm();
    if (margin_ >= 1.0)
        throw std::invalid_argument(
            "TorusDiffeo: invertibility margin ||Dp|| * ||A^-1|| < 1 violated "
            "(got " + std::to_string(margin_) + ")");
}

TorusPoint TorusDiffeo::apply(const TorusPoint& x) const {
    const double lx = A_.a * x.x + A_.b * x.y;
    const double ly = A_.c * x.x + A_.d * x.y;
    if (pert_.empty()) return TorusPoint{lx, ly};
    const Vec2 p = pert_.value(x);
    return TorusPoint{lx + p.x, ly + p.y};
}

Mat2 TorusDiffeo::jacobian(const TorusPoint& x) const {
    if (pert_.empty()) return A_;
    return A_ + pert_.jacobian(x);
}

Tensor222 TorusDiffeo::second(const TorusPoint& x) const {
    if (pert_.empty()) return Tensor222{};
    return pert_.second(x);
}

TorusPoint TorusDiffeo::invert(const TorusPoint& y, double tol, int max_iter) const {
    if (pert_.empty()) {
        return TorusPoint{A_inv_.a * y.x + A_inv_.b * y.y,
                          A_inv_.c * y.x + A_inv_.d * y.y};
    }
    TorusPoint x{A_inv_.a * y.x + A_inv_.b * y.y, A_inv_.c * y.x + A_inv_.d * y.y};
    Vec2 err = displacement(y, apply(x));
    double err_norm = err.norm();
    for (int it = 0; it < max_iter; ++it) {
        if (err_norm <= tol) return x;
        const Mat2 j_inv = jacobian(x).inverse();
        Vec2 step = j_inv * err;
        // Backtracking keeps the Newton step monotone in the error norm.
        for (int halve = 0; halve < 8; ++halve) {
            const TorusPoint cand = exp_map(x, -1.0 * step);
            const Vec2 cand_err = displacement(y, apply(cand));
            if (cand_err.norm() < err_norm || halve == 7) {
                x = cand;
                err = cand_err;
                err_norm = cand_err.norm();
                break;
            }
            step *= 0.5;
        }
    }
    if (err_norm <= tol) return x;
    throw std::runtime_error(
        "TorusDiffeo::invert: no convergence within iteration cap (margin "
        "violation or tol below machine precision)");
}

double TorusDiffeo::c2_norm_upper_bound() const {
    const double a_norm = A_.op_norm();
    const double a_inv_norm = A_inv_.op_norm();
    const double dp = pert_.jacobian_bound();
    const double d2p = pert_.second_bound();
    const double df = a_norm + dp;
    // (A + Dp)^-1 = (I + A^-1 Dp)^-1 A^-1, Neumann-series bound.
    const double df_inv = a_inv_norm / (1.0 - margin_);
    const double d2f = d2p;
    // D^2(f^-1)[u,v] = -Df^-1 D^2f[Df^-1 u, Df^-1 v]
    const double d2f_inv = df_inv * df_inv * df_inv * d2f;
    return std::fmax(std::fmax(df, df_inv), std::fmax(d2f, d2f_inv));
}

TorusMap::TorusMap(std::vector<TorusDiffeo> steps) : steps_(std::move(steps)) {
    if (steps_.empty()) throw std::invalid_argument("TorusMap: empty composition chain");
}

bool TorusMap::linear() const {
    for (const auto& s : steps_)
        if (!s.linear()) return false;
    return true;
}

IntMat2 TorusMap::linear_product() const {
    if (!linear()) throw std::logic_error("TorusMap::linear_product: chain has nonlinear steps");
    IntMat2 prod = steps_.front().linear_part();
    for (std::size_t k = 1; k < steps_.size(); ++k)
        prod = steps_[k].linear_part() * prod;
    return prod;
}

TorusPoint TorusMap::apply(const TorusPoint& x) const {
    TorusPoint p = x;
    for (const auto& s : steps_) p = s.apply(p);
    return p;
}

Mat2 TorusMap::jacobian(const TorusPoint& x) const {
    TorusPoint p = x;
    Mat2 jac = Mat2::identity();
    for (const auto& s : steps_) {
        jac = s.jacobian(p) * jac;
        p = s.apply(p);
    }
    return jac;
}

Tensor222 TorusMap::second(const TorusPoint& x) const {
    // Chain rule: D^2(g o f) = D^2 g[Df ., Df .] + Dg D^2 f.
    TorusPoint p = x;
    Mat2 jac = Mat2::identity();
    Tensor222 tens;
    bool first = true;
    for (const auto& s : steps_) {
        const Mat2 step_jac = s.jacobian(p);
        const Tensor222 step_tens = s.second(p);
        if (first) {
            tens = step_tens;
            first = false;
        } else {
            tens = tensor_conjugate(step_tens, Mat2::identity(), jac) +
                   tensor_conjugate(tens, step_jac, Mat2::identity());
        }
        jac = step_jac * jac;
        p = s.apply(p);
    }
    return tens;
}

TorusPoint TorusMap::invert(const TorusPoint& y, double tol, int max_iter) const {
    TorusPoint p = y;
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it)
        p = it->invert(p, tol, max_iter);
    return p;
}

Mat2 TorusMap::inverse_jacobian(const TorusPoint& y, double tol) const {
    const TorusPoint x = invert(y, tol);
    return jacobian(x).inverse();
}

TorusMap TorusMap::composed(std::vector<TorusDiffeo> steps) {
    if (steps.empty()) throw std::invalid_argument("TorusMap::composed: empty chain");
    bool all_linear = true;
    for (const auto& s : steps)
        if (!s.linear()) { all_linear = false; break; }
    if (all_linear && steps.size() > 1) {
        IntMat2 prod = steps.front().linear_part();
        for (std::size_t k = 1; k < steps.size(); ++k)
            prod = steps[k].linear_part() * prod;
        return TorusMap(TorusDiffeo(prod));
    }
    return TorusMap(std::move(steps));
}

MapEval evaluate(const TorusMap& f, const TorusPoint& x, int order) {
    if (order < 0 || order > 2)
        throw std::invalid_argument("evaluate: order must be 0, 1 or 2");
    MapEval out;
    out.image = f.apply(x);
    if (order >= 1) out.jacobian = f.jacobian(x);
    if (order >= 2) out.second_norm = f.second(x).op_norm();
    return out;
}

C2Norm c2_norm(const TorusMap& f, int grid_n) {
    C2Norm out;
    if (f.linear()) {
        const Mat2 a = f.linear_product().to_mat2();
        out.value = std::fmax(a.op_norm(), a.inverse().op_norm());
        out.exact = true;
        out.rigorous_upper = out.value;
        return out;
    }
    if (grid_n < 2) throw std::invalid_argument("c2_norm: grid_n >= 2 required");
    double df = 0.0, dfi = 0.0, d2f = 0.0, d2fi = 0.0;
    for (int gy = 0; gy < grid_n; ++gy) {
        for (int gx = 0; gx < grid_n; ++gx) {
            const TorusPoint x{static_cast<double>(gx) / grid_n,
                               static_cast<double>(gy) / grid_n};
            const Mat2 j = f.jacobian(x);
            df = std::fmax(df, j.op_norm());
            const Mat2 j_inv = j.inverse();
            dfi = std::fmax(dfi, j_inv.op_norm());
            const Tensor222 t = f.second(x);
            d2f = std::fmax(d2f, t.op_norm());
            const Tensor222 t_inv = tensor_conjugate(t, j_inv * -1.0, j_inv);
            d2fi = std::fmax(d2fi, t_inv.op_norm());
        }
    }
    out.value = std::fmax(std::fmax(df, dfi), std::fmax(d2f, d2fi));
    out.exact = false;
    double upper = 0.0;
    for (const auto& s : f.steps()) upper = std::fmax(upper, s.c2_norm_upper_bound());
    // Upper bound composes crudely for chains; report per-step max for
    // singletons, else fall back to the sampled value.
    out.rigorous_upper = (f.steps().size() == 1) ? upper : out.value;
    return out;
}

double cm_distance(const TorusMap& f, const TorusMap& g, int order, int grid_n) {
    if (order < 0 || order > 2)
        throw std::invalid_argument("cm_distance: order must be 0, 1 or 2");
    if (grid_n < 16)
        throw std::invalid_argument("cm_distance: grid_n >= 16 required");

    double d0 = 0.0, d1f = 0.0, d1b = 0.0, d2f = 0.0, d2b = 0.0;
    for (int gy = 0; gy < grid_n; ++gy) {
        for (int gx = 0; gx < grid_n; ++gx) {
            const TorusPoint x{static_cast<double>(gx) / grid_n,
                               static_cast<double>(gy) / grid_n};
            d0 = std::fmax(d0, dist(f.apply(x), g.apply(x)));
            const TorusPoint xf = f.invert(x);
            const TorusPoint xg = g.invert(x);
            d0 = std::fmax(d0, dist(xf, xg));
            if (order >= 1) {
                d1f = std::fmax(d1f, (f.jacobian(x) - g.jacobian(x)).op_norm());
                const Mat2 jf_inv = f.jacobian(xf).inverse();
                const Mat2 jg_inv = g.jacobian(xg).inverse();
                d1b = std::fmax(d1b, (jf_inv - jg_inv).op_norm());
                if (order >= 2) {
                    d2f = std::fmax(d2f, (f.second(x) - g.second(x)).op_norm());
                    const Tensor222 tf_inv =
                        tensor_conjugate(f.second(xf), jf_inv * -1.0, jf_inv);
                    const Tensor222 tg_inv =
                        tensor_conjugate(g.second(xg), jg_inv * -1.0, jg_inv);
                    d2b = std::fmax(d2b, (tf_inv - tg_inv).op_norm());
                }
            }
        }
    }
    double out = d0;
    if (order >= 1) out += d1f + d1b;
    if (order >= 2) out += d2f + d2b;
    return out;
}

}  // namespace anosov
