#pragma once
// Small fixed-size linear algebra for planar dynamics: 2-vectors, 2x2
// matrices with closed-form spectral quantities, and the symmetric
// 2x2x2 tensor of second derivatives.

#include <array>
#include <cmath>
#include <stdexcept>

namespace anosov {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double xx, double yy) : x(xx), y(yy) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    // z-component of the 3D cross product; signed parallelogram area.
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm_sq() const { return x * x + y * y; }

    Vec2 normalized() const {
        const double n = norm();
        if (n == 0.0) throw std::domain_error("Vec2::normalized: zero vector");
        return {x / n, y / n};
    }
    // Rotation by +pi/2.
    Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    Mat2() = default;
    Mat2(double aa, double bb, double cc, double dd) : a(aa), b(bb), c(cc), d(dd) {}

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
    Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }

    double det() const { return a * d - b * c; }
    double trace() const { return a + d; }
    double frobenius() const { return std::sqrt(a * a + b * b + c * c + d * d); }

    Mat2 transpose() const { return {a, c, b, d}; }

    Mat2 inverse() const {
        const double dt = det();
        if (dt == 0.0) throw std::domain_error("Mat2::inverse: singular matrix");
        return {d / dt, -b / dt, -c / dt, a / dt};
    }

    // Largest singular value, closed form via the eigenvalues of M^T M.
    double op_norm() const {
        const double t = a * a + b * b + c * c + d * d;
        const double dt = det();
        const double disc = std::sqrt(std::fmax(0.0, t * t - 4.0 * dt * dt));
        return std::sqrt(0.5 * (t + disc));
    }

    double min_singular_value() const {
        const double t = a * a + b * b + c * c + d * d;
        const double dt = det();
        const double disc = std::sqrt(std::fmax(0.0, t * t - 4.0 * dt * dt));
        const double lo = 0.5 * (t - disc);
        return std::sqrt(std::fmax(0.0, lo));
    }
};

// Second derivative of a planar map: T[j][l][m] = d^2 f_j / dx_l dx_m,
// symmetric in (l, m). Acts as a bilinear map (u, v) -> Vec2.
struct Tensor222 {
    // t[j][l][m]
    std::array<std::array<std::array<double, 2>, 2>, 2> t{};

    double& at(int j, int l, int m) { return t[j][l][m]; }
    double at(int j, int l, int m) const { return t[j][l][m]; }

    Vec2 apply(const Vec2& u, const Vec2& v) const {
        const double uu[2] = {u.x, u.y};
        const double vv[2] = {v.x, v.y};
        double out[2] = {0.0, 0.0};
        for (int j = 0; j < 2; ++j)
            for (int l = 0; l < 2; ++l)
                for (int m = 0; m < 2; ++m)
                    out[j] += t[j][l][m] * uu[l] * vv[m];
        return {out[0], out[1]};
    }

    // Partial contraction: matrix M with M v = T[u, v].
    Mat2 contract(const Vec2& u) const {
        const double uu[2] = {u.x, u.y};
        double m[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
        for (int j = 0; j < 2; ++j)
            for (int mcol = 0; mcol < 2; ++mcol)
                for (int l = 0; l < 2; ++l)
                    m[j][mcol] += t[j][l][mcol] * uu[l];
        return {m[0][0], m[0][1], m[1][0], m[1][1]};
    }

    Tensor222 operator-(const Tensor222& o) const {
        Tensor222 r;
        for (int j = 0; j < 2; ++j)
            for (int l = 0; l < 2; ++l)
                for (int m = 0; m < 2; ++m)
                    r.t[j][l][m] = t[j][l][m] - o.t[j][l][m];
        return r;
    }

    Tensor222 operator+(const Tensor222& o) const {
        Tensor222 r;
        for (int j = 0; j < 2; ++j)
            for (int l = 0; l < 2; ++l)
                for (int m = 0; m < 2; ++m)
                    r.t[j][l][m] = t[j][l][m] + o.t[j][l][m];
        return r;
    }

    double frobenius() const {
        double s = 0.0;
        for (int j = 0; j < 2; ++j)
            for (int l = 0; l < 2; ++l)
                for (int m = 0; m < 2; ++m)
                    s += t[j][l][m] * t[j][l][m];
        return std::sqrt(s);
    }

    bool is_zero() const {
        for (int j = 0; j < 2; ++j)
            for (int l = 0; l < 2; ++l)
                for (int m = 0; m < 2; ++m)
                    if (t[j][l][m] != 0.0) return false;
        return true;
    }

    // sup_{|u|=|v|=1} |T[u,v]|: for fixed u the optimum over v is the top
    // singular value of the contraction, so only the u-angle is searched
    // (dense scan + golden-section refinement). Frobenius() is a cheap
    // rigorous upper bound when one is needed instead.
    double op_norm() const;
};

// Change of variables for second derivatives: S[u,v] = L * T[J u, J v].
Tensor222 tensor_conjugate(const Tensor222& t, const Mat2& post, const Mat2& pre);

// Angle between the lines spanned by u and v, in [0, pi/2].
inline double line_angle(const Vec2& u, const Vec2& v) {
    return std::atan2(std::fabs(u.cross(v)), std::fabs(u.dot(v)));
}

}  // namespace anosov
