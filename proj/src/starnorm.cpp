#include "anosov/starnorm.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace anosov {

StarNorm::StarNorm(FamilySpec F, SplittingField S, double lambda_tilde,
                   int n_trunc)
    : F_(std::move(F)), S_(std::move(S)), lambda_tilde_(lambda_tilde),
      n_trunc_(n_trunc) {
    if (!(lambda_tilde > 0.0 && lambda_tilde < 1.0))
        throw std::invalid_argument("StarNorm: lambda_tilde must lie in (0, 1)");
    if (n_trunc < 0)
        throw std::invalid_argument("StarNorm: n_trunc must be >= 0");
}

double StarNorm::stable_norm(long i, const TorusPoint& p, const Vec2& v) const {
    double sum = v.norm();
    TorusPoint x = p;
    Vec2 w = v;
    double weight = 1.0;
    for (int n = 1; n <= n_trunc_; ++n) {
        const TorusMap& f = F_.map_at(i + n - 1);
        w = f.jacobian(x) * w;
        x = f.apply(x);
        weight /= lambda_tilde_;
        sum += weight * w.norm();
    }
    return sum;
}

double StarNorm::unstable_norm(long i, const TorusPoint& p, const Vec2& v) const {
    double sum = v.norm();
    TorusPoint x = p;
    Vec2 w = v;
    double weight = 1.0;
    for (int n = 1; n <= n_trunc_; ++n) {
        const TorusMap& f = F_.map_at(i - n);
        const TorusPoint xm = f.invert(x);
        w = f.jacobian(xm).inverse() * w;
        x = xm;
        weight /= lambda_tilde_;
        sum += weight * w.norm();
    }
    return sum;
}

double StarNorm::star_norm(long i, const TorusPoint& p, const Vec2& v) const {
    const Vec2 es = S_.stable(i, p);
    const Vec2 eu = S_.unstable(i, p);
    const Mat2 frame{es.x, eu.x, es.y, eu.y};
    const Vec2 coords = frame.inverse() * v;
    const double ns = stable_norm(i, p, es * coords.x);
    const double nu = unstable_norm(i, p, eu * coords.y);
    return std::max(ns, nu);
}

double StarNorm::tail_bound(double c, double lambda) const {
    if (!(lambda < lambda_tilde_))
        throw std::invalid_argument(
            "StarNorm::tail_bound: requires lambda < lambda_tilde (series "
            "diverges otherwise)");
    const double q = lambda / lambda_tilde_;
    return c * std::pow(q, n_trunc_ + 1) / (1.0 - q);
}

StarNorm::ContractionReport StarNorm::verify_contraction(Window window,
                                                         int samples,
                                                         unsigned seed) const {
    if (window.lo < S_.window().lo || window.hi > S_.window().hi)
        throw std::invalid_argument(
            "StarNorm::verify_contraction: window not covered by the field");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::uniform_int_distribution<long> I(window.lo, window.hi);
    ContractionReport rep;
    rep.samples = samples;
    for (int t = 0; t < samples; ++t) {
        const long i = I(rng);
        const TorusPoint p{U(rng), U(rng)};
        const double scale = 0.5 + U(rng);

        const Vec2 vs = S_.stable(i, p) * scale;
        const TorusMap& f = F_.map_at(i);
        const Vec2 ws = f.jacobian(p) * vs;
        const double rs = stable_norm(i + 1, f.apply(p), ws) / stable_norm(i, p, vs);
        rep.max_stable_ratio = std::max(rep.max_stable_ratio, rs);

        const Vec2 vu = S_.unstable(i, p) * scale;
        const TorusMap& fb = F_.map_at(i - 1);
        const TorusPoint xm = fb.invert(p);
        const Vec2 wu = fb.jacobian(xm).inverse() * vu;
        const double ru = unstable_norm(i - 1, xm, wu) / unstable_norm(i, p, vu);
        rep.max_unstable_ratio = std::max(rep.max_unstable_ratio, ru);
    }
    return rep;
}

StarNorm::EquivalenceReport StarNorm::equivalence_constant(Window window,
                                                           int samples,
                                                           unsigned seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::uniform_int_distribution<long> I(window.lo, window.hi);
    EquivalenceReport rep;
    for (int t = 0; t < samples; ++t) {
        const long i = I(rng);
        const TorusPoint p{U(rng), U(rng)};
        const double phi = 2.0 * 3.14159265358979323846 * U(rng);
        const Vec2 v{std::cos(phi), std::sin(phi)};
        const double star = star_norm(i, p, v);
        rep.max_star_over_euclidean =
            std::max(rep.max_star_over_euclidean, star / v.norm());
        rep.max_euclidean_over_star =
            std::max(rep.max_euclidean_over_star, v.norm() / star);
    }
    rep.C = std::max({1.0, rep.max_star_over_euclidean, rep.max_euclidean_over_star});
    return rep;
}

StarNorm adapted_norm(const FamilySpec& F, const SplittingField& S,
                      double lambda_tilde, int n_trunc) {
    return StarNorm(F, S, lambda_tilde, n_trunc);
}

}  // namespace anosov
