#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "anosov/torus.hpp"

using namespace anosov;

namespace {

// Independent oracle: the torus distance equals the minimum Euclidean
// distance over the nine nearest integer translates of the difference.
double dist_by_translates(const TorusPoint& p, const TorusPoint& q) {
    double best = 1e300;
    for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy) {
            const double ex = p.x - q.x + dx;
            const double ey = p.y - q.y + dy;
            best = std::min(best, std::hypot(ex, ey));
        }
    return best;
}

}  // namespace

TEST_CASE("interval wrapping") {
    CHECK(wrap_unit(0.0) == doctest::Approx(0.0));
    CHECK(wrap_unit(1.0) == doctest::Approx(0.0));
    CHECK(wrap_unit(-0.25) == doctest::Approx(0.75));
    CHECK(wrap_unit(3.75) == doctest::Approx(0.75));
    CHECK(wrap_half(0.6) == doctest::Approx(-0.4));
    CHECK(wrap_half(-0.6) == doctest::Approx(0.4));
    CHECK(wrap_half(0.5) == doctest::Approx(-0.5));
    // Folded values always live in [-1/2, 1/2).
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-40.0, 40.0);
    for (int t = 0; t < 2000; ++t) {
        const double w = wrap_half(U(rng));
        CHECK(w >= -0.5);
        CHECK(w < 0.5);
        const double v = wrap_unit(U(rng));
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("distance of a diagonal translation is eps * sqrt(2)") {
    const double eps = 1e-3;
    const TorusPoint p{0.37, 0.81};
    const TorusPoint q{p.x + eps, p.y + eps};
    CHECK(dist(p, q) == doctest::Approx(eps * std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("distance matches the nine-translate oracle") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int t = 0; t < 5000; ++t) {
        const TorusPoint p{U(rng), U(rng)};
        const TorusPoint q{U(rng), U(rng)};
        CHECK(dist(p, q) == doctest::Approx(dist_by_translates(p, q)).epsilon(1e-14));
    }
    // Wrap-around pair: the short way crosses the seam.
    const TorusPoint a{0.95, 0.95}, b{0.05, 0.05};
    CHECK(dist(a, b) == doctest::Approx(std::hypot(0.1, 0.1)).epsilon(1e-13));
}

TEST_CASE("distance is a metric bounded by sqrt(2)/2") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int t = 0; t < 2000; ++t) {
        const TorusPoint p{U(rng), U(rng)};
        const TorusPoint q{U(rng), U(rng)};
        const TorusPoint r{U(rng), U(rng)};
        CHECK(dist(p, q) == doctest::Approx(dist(q, p)).epsilon(1e-15));
        CHECK(dist(p, p) == doctest::Approx(0.0));
        CHECK(dist(p, r) <= dist(p, q) + dist(q, r) + 1e-12);
        CHECK(dist(p, q) <= std::sqrt(2.0) / 2.0 + 1e-15);
    }
}

TEST_CASE("exp and log invert each other inside the injectivity radius") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::uniform_real_distribution<double> V(-0.49, 0.49);
    for (int t = 0; t < 2000; ++t) {
        const TorusPoint p{U(rng), U(rng)};
        Vec2 v{V(rng), V(rng)};
        if (v.norm() >= 0.5) v = v * (0.49 / v.norm());
        const TorusPoint q = exp_map(p, v);
        const Vec2 w = log_map(p, q);
        CHECK(w.x == doctest::Approx(v.x).epsilon(1e-13));
        CHECK(w.y == doctest::Approx(v.y).epsilon(1e-13));
        CHECK(dist(p, q) == doctest::Approx(v.norm()).epsilon(1e-13));
    }
}

TEST_CASE("log rejects points at or beyond half the injectivity diameter") {
    const TorusPoint p{0.0, 0.0};
    CHECK_THROWS_AS((void)log_map(p, TorusPoint{0.5, 0.0}), std::domain_error);
    CHECK_THROWS_AS((void)log_map(p, TorusPoint{0.4, 0.4}), std::domain_error);
    CHECK_NOTHROW((void)log_map(p, TorusPoint{0.49, 0.0}));
}

TEST_CASE("displacement is the wrapped difference q - p") {
    const TorusPoint p{0.1, 0.9};
    const TorusPoint q{0.9, 0.1};
    const Vec2 d = displacement(p, q);
    CHECK(d.x == doctest::Approx(-0.2).epsilon(1e-13));
    CHECK(d.y == doctest::Approx(0.2).epsilon(1e-13));
}
