#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "anosov/multiplicative.hpp"
#include "anosov/splitting.hpp"
#include "anosov/starnorm.hpp"

using namespace anosov;

namespace {

const IntMat2 kCat{2, 1, 1, 1};

// Cat-map eigendirections: A (1, phi - 1) = phi^2 (1, phi - 1) etc., with
// phi the golden ratio; the matrix is symmetric so they are orthogonal.
Vec2 cat_unstable() {
    return canonical_direction(Vec2{1.0, (std::sqrt(5.0) - 1.0) / 2.0});
}
Vec2 cat_stable() {
    return canonical_direction(Vec2{1.0, -(1.0 + std::sqrt(5.0)) / 2.0});
}

SplittingField cat_field(Window w, int grid_n) {
    return SplittingField::constant(w, grid_n, cat_stable(), cat_unstable());
}

}  // namespace

TEST_CASE("canonical_direction normalises and fixes the sign") {
    const Vec2 a = canonical_direction(Vec2{-3.0, 4.0});
    CHECK(a.x == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(a.y == doctest::Approx(-0.8).epsilon(1e-15));
    const Vec2 b = canonical_direction(Vec2{0.0, -2.0});
    CHECK(b.x == 0.0);
    CHECK(b.y == 1.0);
    CHECK(canonical_direction(Vec2{5.0, 0.0}).x == 1.0);
    CHECK_THROWS_AS(canonical_direction(Vec2{0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("constant field returns its directions everywhere") {
    const SplittingField S = cat_field(Window{-2, 3}, 8);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const long i = -2 + static_cast<long>(k % 6);
        const TorusPoint p{U(rng), U(rng)};
        CHECK(line_angle(S.stable(i, p), cat_stable()) < 1e-14);
        CHECK(line_angle(S.unstable(i, p), cat_unstable()) < 1e-14);
        CHECK(S.stable(i, p).norm() == doctest::Approx(1.0).epsilon(1e-13));
    }
    CHECK(S.covers(-2));
    CHECK(S.covers(3));
    CHECK_FALSE(S.covers(4));
    CHECK_THROWS_AS(S.stable(4, TorusPoint{0.0, 0.0}), std::out_of_range);
}

TEST_CASE("frame components invert the frame decomposition") {
    const SplittingField S = cat_field(Window{0, 0}, 4);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        const double a = U(rng), b = U(rng);
        const TorusPoint p{0.3, 0.8};
        const Vec2 v = S.stable(0, p) * a + S.unstable(0, p) * b;
        const Vec2 comp = S.components(0, p, v);
        CHECK(comp.x == doctest::Approx(a).epsilon(1e-12));
        CHECK(comp.y == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("doubled-angle interpolation tracks a rotating line field") {
    // Line angle pi * x is continuous on the torus as a field of lines
    // (angle pi at x -> 1 is the same line as angle 0).
    const auto fn = [](long, const TorusPoint& p) {
        const double th = M_PI * p.x;
        return FramePair{Vec2{std::cos(th), std::sin(th)},
                         Vec2{-std::sin(th), std::cos(th)}};
    };
    const SplittingField S(Window{0, 0}, 16, fn);
    for (double x : {0.031, 0.47, 0.733, 0.9, 0.96875, 0.984375}) {
        const TorusPoint p{x, 0.5};
        const Vec2 want{std::cos(M_PI * x), std::sin(M_PI * x)};
        CHECK(line_angle(S.stable(0, p), want) < 5e-3);
        CHECK(line_angle(S.unstable(0, p), Vec2{-want.y, want.x}) < 5e-3);
    }
}

TEST_CASE("stored nodes ignore the sign convention of the supplier") {
    const auto base = [](long, const TorusPoint& p) {
        const double th = M_PI * p.x;
        return FramePair{Vec2{std::cos(th), std::sin(th)},
                         Vec2{-std::sin(th), std::cos(th)}};
    };
    const auto flipped = [&base](long i, const TorusPoint& p) {
        FramePair f = base(i, p);
        // Alternate the vector signs on a checkerboard: same line field.
        const double s =
            (static_cast<int>(std::floor(p.x * 8 + p.y * 8)) % 2 == 0) ? 1.0
                                                                       : -1.0;
        return FramePair{f.stable * s, f.unstable * (-s)};
    };
    const SplittingField A(Window{0, 0}, 8, base);
    const SplittingField B(Window{0, 0}, 8, flipped);
    for (int jy = 0; jy < 8; ++jy)
        for (int jx = 0; jx < 8; ++jx) {
            CHECK(A.stable_node(0, jx, jy).x == B.stable_node(0, jx, jy).x);
            CHECK(A.stable_node(0, jx, jy).y == B.stable_node(0, jx, jy).y);
            CHECK(A.unstable_node(0, jx, jy).x == B.unstable_node(0, jx, jy).x);
        }
}

TEST_CASE("per-index field from continued-fraction frame data") {
    const MultiplicativeFamily M = build_multiplicative(IntSeqSpec::periodic({1, 2}));
    const SplittingField S = SplittingField::from_data(M.data, 4);
    CHECK(S.window().lo == M.data.window.lo);
    CHECK(S.window().hi == M.data.window.hi);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (long i = M.data.window.lo; i <= M.data.window.hi; ++i) {
        const TorusPoint p{U(rng), U(rng)};
        CHECK(line_angle(S.stable(i, p), M.data.s[M.data.idx(i)]) < 1e-14);
        CHECK(line_angle(S.unstable(i, p), M.data.u[M.data.idx(i)]) < 1e-14);
    }

    // Periodic tiling reaches indices outside the stored span.
    const long span = M.data.window.hi - M.data.window.lo + 1;
    const SplittingField T = SplittingField::from_data(M.data, 4, Window{-4, 5});
    for (long i = -4; i <= 5; ++i) {
        const long j = M.data.window.lo + floor_mod(i - M.data.window.lo, span);
        const TorusPoint p{U(rng), U(rng)};
        CHECK(line_angle(T.stable(i, p), M.data.s[M.data.idx(j)]) < 1e-14);
        CHECK(line_angle(T.unstable(i, p), M.data.u[M.data.idx(j)]) < 1e-14);
    }
}

TEST_CASE("angle property: orthogonal, generic, and degenerate splittings") {
    const SplittingField S = cat_field(Window{0, 1}, 4);
    const AngleReport cat = angle_property(S);
    CHECK(cat.min_angle == doctest::Approx(M_PI / 2).epsilon(1e-12));
    CHECK(cat.spa);

    const MultiplicativeFamily M = build_multiplicative(IntSeqSpec::periodic({1}));
    const AngleReport ones = angle_property(SplittingField::from_data(M.data, 4));
    CHECK(ones.min_angle > 0.4);
    CHECK(ones.spa);

    const SplittingField degen = SplittingField::constant(
        Window{0, 0}, 4, Vec2{1.0, 0.0}, canonical_direction(Vec2{1.0, 1e-5}));
    const AngleReport bad = angle_property(degen);
    CHECK(bad.min_angle == doctest::Approx(1e-5).epsilon(1e-6));
    CHECK_FALSE(bad.spa);
    CHECK(angle_property(degen, 1e-6).spa);
    CHECK(degen.min_angle() == bad.min_angle);
}

TEST_CASE("field construction validates its grid") {
    CHECK_THROWS_AS(SplittingField::constant(Window{0, 0}, 1, Vec2{1.0, 0.0},
                                             Vec2{0.0, 1.0}),
                    std::invalid_argument);
}

TEST_CASE("truncated star norm at depth zero is the Euclidean norm") {
    const FamilySpec F = FamilySpec::constant(TorusMap{TorusDiffeo(kCat)});
    const StarNorm N = adapted_norm(F, cat_field(Window{0, 0}, 4), 0.5, 0);
    const TorusPoint p{0.2, 0.7};
    const Vec2 v{0.3, -1.1};
    CHECK(N.stable_norm(0, p, v) == doctest::Approx(v.norm()).epsilon(1e-15));
    CHECK(N.unstable_norm(0, p, v) == doctest::Approx(v.norm()).epsilon(1e-15));
    // With unit frame vectors the mixed norm is the max coordinate.
    const Vec2 comp = cat_field(Window{0, 0}, 4).components(0, p, v);
    CHECK(N.star_norm(0, p, v) ==
          doctest::Approx(std::max(std::fabs(comp.x), std::fabs(comp.y)))
              .epsilon(1e-12));
}

TEST_CASE("adapted norm contracts strictly in one step on the cat family") {
    const FamilySpec F = FamilySpec::constant(TorusMap{TorusDiffeo(kCat)});
    const StarNorm N = adapted_norm(F, cat_field(Window{-1, 2}, 4), 0.5, 10);
    const auto rep = N.verify_contraction(Window{0, 1}, 1000, 42);
    CHECK(rep.samples == 1000);
    CHECK(rep.max_stable_ratio > 0.0);
    CHECK(rep.max_stable_ratio < 0.5);
    CHECK(rep.max_unstable_ratio > 0.0);
    CHECK(rep.max_unstable_ratio < 0.5);
}

TEST_CASE("tail bound follows the geometric series and guards divergence") {
    const FamilySpec F = FamilySpec::constant(TorusMap{TorusDiffeo(kCat)});
    const StarNorm N = adapted_norm(F, cat_field(Window{0, 0}, 4), 0.5, 10);
    const double lambda = (3.0 - std::sqrt(5.0)) / 2.0;
    const double q = lambda / 0.5;
    CHECK(N.tail_bound(1.3, lambda) ==
          doctest::Approx(1.3 * std::pow(q, 11) / (1.0 - q)).epsilon(1e-13));
    CHECK_THROWS_AS(N.tail_bound(1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(N.tail_bound(1.0, 0.7), std::invalid_argument);
}

TEST_CASE("star/Euclidean equivalence constant holds on fresh samples") {
    const FamilySpec F = FamilySpec::constant(TorusMap{TorusDiffeo(kCat)});
    const StarNorm N = adapted_norm(F, cat_field(Window{-1, 2}, 4), 0.5, 10);
    const auto first = N.equivalence_constant(Window{0, 1}, 5000, 7);
    const auto fresh = N.equivalence_constant(Window{0, 1}, 500, 1234);
    CHECK(first.C >= 1.0);
    // Exact stable-direction sum: sum_{n<=10} (lambda/lt)^n.
    const double q = (3.0 - std::sqrt(5.0)) / 2.0 / 0.5;
    const double exact = (1.0 - std::pow(q, 11)) / (1.0 - q);
    CHECK(first.C > 1.5);
    CHECK(first.C < exact + 1e-9);
    CHECK(fresh.max_star_over_euclidean <= first.C * 1.001);
    CHECK(fresh.max_euclidean_over_star <= first.C * 1.001);
}

TEST_CASE("adapted norm construction and sampling guards") {
    const FamilySpec F = FamilySpec::constant(TorusMap{TorusDiffeo(kCat)});
    const SplittingField S = cat_field(Window{0, 0}, 4);
    CHECK_THROWS_AS(adapted_norm(F, S, 1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(adapted_norm(F, S, 0.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(adapted_norm(F, S, 0.5, -1), std::invalid_argument);
    const StarNorm N = adapted_norm(F, S, 0.5, 2);
    CHECK_THROWS_AS(N.verify_contraction(Window{0, 1}, 10, 1),
                    std::invalid_argument);
}
