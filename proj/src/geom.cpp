#include "anosov/geom.hpp"

namespace anosov {

namespace {

double tensor_norm_at_angle(const Tensor222& t, double theta) {
    const Vec2 u{std::cos(theta), std::sin(theta)};
    return t.contract(u).op_norm();
}

}  // namespace

double Tensor222::op_norm() const {
    if (is_zero()) return 0.0;
    // The objective has period pi in the u-angle.
    constexpr int kScan = 256;
    double best = -1.0, best_theta = 0.0;
    for (int k = 0; k < kScan; ++k) {
        const double theta = M_PI * k / kScan;
        const double val = tensor_norm_at_angle(*this, theta);
        if (val > best) {
            best = val;
            best_theta = theta;
        }
    }
    // Golden-section refinement around the best bracket.
    const double step = M_PI / kScan;
    double lo = best_theta - step, hi = best_theta + step;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = tensor_norm_at_angle(*this, x1), f2 = tensor_norm_at_angle(*this, x2);
    for (int it = 0; it < 60; ++it) {
        if (f1 < f2) {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = tensor_norm_at_angle(*this, x2);
        } else {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = tensor_norm_at_angle(*this, x1);
        }
    }
    return std::fmax(best, std::fmax(f1, f2));
}

Tensor222 tensor_conjugate(const Tensor222& t, const Mat2& post, const Mat2& pre) {
    const double J[2][2] = {{pre.a, pre.b}, {pre.c, pre.d}};
    const double L[2][2] = {{post.a, post.b}, {post.c, post.d}};
    Tensor222 r;
    for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l)
            for (int m = 0; m < 2; ++m) {
                double s = 0.0;
                for (int jp = 0; jp < 2; ++jp)
                    for (int lp = 0; lp < 2; ++lp)
                        for (int mp = 0; mp < 2; ++mp)
                            s += L[j][jp] * t.t[jp][lp][mp] * J[lp][l] * J[mp][m];
                r.t[j][l][m] = s;
            }
    return r;
}

}  // namespace anosov
