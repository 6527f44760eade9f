#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "anosov/certifier.hpp"
#include "anosov/manifolds.hpp"

using namespace anosov;

namespace {

const IntMat2 kCat{2, 1, 1, 1};
const double kLamMinus = 0.3819660112501051;   // (3 - sqrt 5)/2
const double kLogLamMinus = -0.962423650119207;

TorusDiffeo perturbed_cat(double amp) {
    std::vector<TrigMode> modes;
    modes.push_back(TrigMode{1, 0, Vec2{amp, 0.0}, Vec2{0.0, amp}});
    modes.push_back(TrigMode{0, 1, Vec2{0.0, -amp}, Vec2{amp, 0.0}});
    return TorusDiffeo(kCat, TrigPerturbation{std::move(modes)});
}

Vec2 cat_unstable() {
    return canonical_direction(Vec2{1.0, (std::sqrt(5.0) - 1.0) / 2.0});
}
Vec2 cat_stable() {
    return canonical_direction(Vec2{1.0, -(1.0 + std::sqrt(5.0)) / 2.0});
}

SplittingField cat_field(Window w, int grid_n) {
    return SplittingField::constant(w, grid_n, cat_stable(), cat_unstable());
}

FamilySpec cat_family() { return FamilySpec::constant(TorusMap{TorusDiffeo(kCat)}); }

const FamilySpec& perturbed_family() {
    static const FamilySpec F =
        FamilySpec::constant(TorusMap{perturbed_cat(0.01)});
    return F;
}

const SplittingField& perturbed_field() {
    static const SplittingField S =
        extract_splitting(perturbed_family(), cat_field(Window{-41, 42}, 16), 20,
                          Window{-21, 21}, 16)
            .field;
    return S;
}

Vec2 rotate(const Vec2& v, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return Vec2{c * v.x - s * v.y, s * v.x + c * v.y};
}

const TorusPoint kBase{0.3125, 0.6875};  // lies on the 16x16 sample lattice

}  // namespace

TEST_CASE("natural cubic spline interpolates nodes and simple functions") {
    SUBCASE("reproduces affine data exactly, including extrapolation") {
        const std::vector<double> xs{-1.0, -0.25, 0.1, 0.8, 2.0};
        std::vector<double> ys;
        for (double x : xs) ys.push_back(2.0 * x + 1.0);
        const CubicSpline s(xs, ys);
        for (double x : {-1.0, -0.6, 0.0, 0.37, 1.9, -1.5, 2.5}) {
            CHECK(s.value(x) == doctest::Approx(2.0 * x + 1.0).epsilon(1e-13));
            CHECK(s.derivative(x) == doctest::Approx(2.0).epsilon(1e-12));
        }
    }
    SUBCASE("two nodes give the chord") {
        const CubicSpline s({0.0, 2.0}, {1.0, 5.0});
        CHECK(s.value(1.0) == doctest::Approx(3.0));
        CHECK(s.derivative(0.5) == doctest::Approx(2.0));
    }
    SUBCASE("approximates sine with fourth-order node error") {
        const double pi = 3.14159265358979323846;
        std::vector<double> xs, ys;
        for (int k = 0; k <= 16; ++k) {
            xs.push_back(pi * k / 16);
            ys.push_back(std::sin(xs.back()));
        }
        const CubicSpline s(xs, ys);
        double err = 0.0, derr = 0.0;
        for (int k = 0; k < 200; ++k) {
            const double x = pi * (k + 0.5) / 200;
            err = std::max(err, std::fabs(s.value(x) - std::sin(x)));
            derr = std::max(derr, std::fabs(s.derivative(x) - std::cos(x)));
        }
        CHECK(err < 1e-4);
        CHECK(derr < 1e-3);
        CHECK(s.value(xs[5]) == doctest::Approx(ys[5]).epsilon(1e-15));
    }
    SUBCASE("rejects degenerate node sets") {
        CHECK_THROWS_AS(CubicSpline({0.0}, {1.0}), std::invalid_argument);
        CHECK_THROWS_AS(CubicSpline({0.0, 1.0, 1.0}, {0.0, 1.0, 2.0}),
                        std::invalid_argument);
        CHECK_THROWS_AS(CubicSpline({0.0, 1.0}, {0.0, 1.0, 2.0}),
                        std::invalid_argument);
    }
}

TEST_CASE("manifolds of a linear toral automorphism are eigenline segments") {
    const FamilySpec F = cat_family();
    const SplittingField S = cat_field(Window{-25, 25}, 4);
    const TorusPoint p{0.3, 0.7};

    const LocalManifold Wu =
        compute_local_manifold(F, S, p, 0, Subbundle::Unstable, 0.01, 20);
    const LocalManifold Ws =
        compute_local_manifold(F, S, p, 0, Subbundle::Stable, 0.01, 20);

    for (const LocalManifold* M : {&Wu, &Ws}) {
        CHECK(M->base.x == doctest::Approx(p.x).epsilon(1e-12));
        CHECK(M->tangency < 1e-9);
        CHECK(M->lipschitz < 1e-9);
        for (double v : M->values) CHECK(std::fabs(v) < 1e-10);
        for (double d : M->step_diffs) CHECK(d < 1e-10);
    }
    CHECK(Wu.e_side.x == doctest::Approx(cat_unstable().x).epsilon(1e-12));
    CHECK(Ws.e_side.x == doctest::Approx(cat_stable().x).epsilon(1e-12));

    for (double t : {-0.01, -0.004, 0.0, 0.0063, 0.01}) {
        CHECK(dist(Wu.point_at(t), exp_map(p, cat_unstable() * t)) < 1e-9);
        CHECK(dist(Ws.point_at(t), exp_map(p, cat_stable() * t)) < 1e-9);
    }

    SUBCASE("distance query resolves on- and off-curve points") {
        CHECK(Wu.distance_to(Wu.point_at(0.004)) < 1e-12);
        const TorusPoint off = exp_map(p, cat_stable() * 0.002);
        CHECK(Wu.distance_to(off) == doctest::Approx(0.002).epsilon(1e-6));
        CHECK(Wu.g_at(Wu.nodes[3]) == doctest::Approx(Wu.values[3]).epsilon(1e-15));
    }
}

TEST_CASE("graph transform contracts successive iterate differences") {
    const LocalManifold M = compute_local_manifold(
        perturbed_family(), perturbed_field(), kBase, 0, Subbundle::Unstable,
        0.01, 20);
    REQUIRE(M.step_diffs.size() == 20);
    CHECK(M.step_diffs.front() > 1e-8);
    CHECK(M.step_diffs.back() < 1e-12);
    int checked = 0;
    double log_sum = 0.0;
    for (std::size_t k = 1; k < M.step_diffs.size(); ++k) {
        if (M.step_diffs[k - 1] < 1e-13 || M.step_diffs[k] < 1e-13) continue;
        const double ratio = M.step_diffs[k] / M.step_diffs[k - 1];
        CHECK(ratio < 0.55);
        log_sum += std::log(ratio);
        ++checked;
    }
    CHECK(checked >= 5);
    // Mean contraction factor tracks the squared hyperbolicity rate.
    CHECK(std::exp(log_sum / checked) < 0.25);
}

TEST_CASE("perturbed-map manifolds are tangent to the invariant splitting") {
    const LocalManifold Wu = compute_local_manifold(
        perturbed_family(), perturbed_field(), kBase, 0, Subbundle::Unstable,
        0.01, 20);
    const LocalManifold Ws = compute_local_manifold(
        perturbed_family(), perturbed_field(), kBase, 0, Subbundle::Stable,
        0.01, 20);
    CHECK(Wu.tangency < 1e-4);
    CHECK(Ws.tangency < 1e-4);
    CHECK(Wu.lipschitz < 0.02);
    CHECK(Ws.lipschitz < 0.02);

    SUBCASE("the two local manifolds meet only at the base point") {
        for (double tu = -0.01; tu <= 0.0101; tu += 0.002) {
            if (std::fabs(tu) < 1e-3) continue;
            for (double ts = -0.01; ts <= 0.0101; ts += 0.002) {
                if (std::fabs(ts) < 1e-3) continue;
                CHECK(dist(Wu.point_at(tu), Ws.point_at(ts)) > 2e-4);
            }
        }
    }
}

TEST_CASE("backward images of unstable manifolds land on the pulled-back manifold") {
    SUBCASE("linear automorphism, machine precision") {
        const FamilySpec F = cat_family();
        const SplittingField S = cat_field(Window{-25, 25}, 4);
        const TorusPoint p{0.3, 0.7};
        const LocalManifold W0 =
            compute_local_manifold(F, S, p, 0, Subbundle::Unstable, 0.01, 20);
        const TorusPoint pm1 = F.map_at(-1).invert(p);
        const LocalManifold Wm1 =
            compute_local_manifold(F, S, pm1, -1, Subbundle::Unstable, 0.01, 20);
        for (double t = -0.01; t <= 0.0101; t += 0.0025) {
            const TorusPoint image = F.map_at(-1).invert(W0.point_at(t));
            CHECK(Wm1.distance_to(image) < 1e-10);
        }
    }
    SUBCASE("perturbed family") {
        const FamilySpec& F = perturbed_family();
        const SplittingField& S = perturbed_field();
        const LocalManifold W0 = compute_local_manifold(
            F, S, kBase, 0, Subbundle::Unstable, 0.01, 20);
        const TorusPoint pm1 = F.map_at(-1).invert(kBase);
        const LocalManifold Wm1 = compute_local_manifold(
            F, S, pm1, -1, Subbundle::Unstable, 0.01, 20);
        for (double t = -0.01; t <= 0.0101; t += 0.0025) {
            const TorusPoint image = F.map_at(-1).invert(W0.point_at(t));
            CHECK(Wm1.distance_to(image) < 1e-6);
        }
    }
}

TEST_CASE("fitted contraction constants certify sampled orbit contraction") {
    const FamilySpec F = cat_family();
    const SplittingField S = cat_field(Window{-25, 25}, 4);
    const LocalManifold Wu = compute_local_manifold(
        F, S, TorusPoint{0.3, 0.7}, 0, Subbundle::Unstable, 0.01, 20);

    SUBCASE("fitted rate matches the exact eigenvalue") {
        CHECK(Wu.zeta_fitted == doctest::Approx(kLamMinus).epsilon(1e-6));
        CHECK(Wu.k_fitted == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(Wu.zeta > Wu.zeta_fitted);
        CHECK(Wu.K > Wu.k_fitted);
    }
    SUBCASE("exact constants sit on the contraction boundary") {
        // Depth capped at 8: rounding leaks a sliver of each separation
        // into the expanding line, and the relative contamination grows by
        // the eigenvalue ratio every backward step.
        LocalManifold oracle = Wu;
        oracle.K = 1.0;
        oracle.zeta = kLamMinus;
        const Certificate cert = contraction_rate_check(oracle, F, 8, 50);
        CHECK(cert.status == CertStatus::Certified);
        CHECK(cert.constants.at("max_ratio") ==
              doctest::Approx(1.0).epsilon(1e-4));
        CHECK(cert.constants.at("max_ratio") >= 1.0 - 1e-12);
        REQUIRE(cert.witnesses.size() == 1);
        CHECK(cert.witnesses[0].scalars.at("value") ==
              cert.constants.at("max_ratio"));
        CHECK(cert.kind == "manifold-contraction");
    }
    SUBCASE("stored inflated constants certify with slack") {
        const Certificate cert = contraction_rate_check(Wu, F, 15, 100);
        CHECK(cert.status == CertStatus::Certified);
        CHECK(cert.constants.at("max_ratio") < 1.0);
    }
    SUBCASE("an optimistic rate is falsified") {
        LocalManifold wrong = Wu;
        wrong.K = 1.0;
        wrong.zeta = 0.2;
        const Certificate cert = contraction_rate_check(wrong, F, 15, 50);
        CHECK(cert.status == CertStatus::Falsified);
        CHECK(cert.constants.at("max_ratio") > 10.0);
    }
    SUBCASE("perturbed family stays within the expected constants") {
        const LocalManifold M = compute_local_manifold(
            perturbed_family(), perturbed_field(), kBase, 0,
            Subbundle::Unstable, 0.01, 20);
        CHECK(M.zeta <= 0.42);
        CHECK(M.K <= 2.0);
        // Depth capped at 10: sampled manifold points start a sliver off
        // the true manifold, and backward orbits amplify that transversal
        // sliver by the expansion rate until it drowns the contraction.
        const Certificate cert =
            contraction_rate_check(M, perturbed_family(), 10, 100);
        CHECK(cert.status == CertStatus::Certified);
    }
    SUBCASE("degenerate rates are rejected") {
        LocalManifold bad = Wu;
        bad.zeta = 0.0;
        CHECK_THROWS_AS(contraction_rate_check(bad, F, 15, 50),
                        std::invalid_argument);
        bad.zeta = 1.0;
        CHECK_THROWS_AS(contraction_rate_check(bad, F, 15, 50),
                        std::invalid_argument);
        CHECK_THROWS_AS(contraction_rate_check(Wu, F, -1, 50),
                        std::invalid_argument);
        CHECK_THROWS_AS(contraction_rate_check(Wu, F, 15, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("convergence exponents recover linear contraction rates") {
    const FamilySpec F = cat_family();
    const TorusPoint p{0.3, 0.7};

    SUBCASE("identical orbits report negative infinity") {
        const ConvergenceExponents r = convergence_exponents(F, p, p, 0, 20);
        CHECK(std::isinf(r.theta));
        CHECK(r.theta < 0);
        CHECK(std::isinf(r.delta));
        CHECK(r.delta < 0);
        CHECK(r.n_used == 0);
    }
    // Depth 10 with offset 1e-5 keeps both fits inside the clean window:
    // deeper orbits let the rounding leak into the expanding line overtake
    // the true contracting separation and bend the log-distance fit.
    SUBCASE("stable-direction offsets contract forward, expand backward") {
        const TorusPoint q = exp_map(p, cat_stable() * 1e-5);
        const ConvergenceExponents r = convergence_exponents(F, p, q, 0, 10);
        CHECK(r.theta == doctest::Approx(kLogLamMinus).epsilon(0.02));
        CHECK(r.delta == doctest::Approx(-kLogLamMinus).epsilon(0.02));
        CHECK(r.n_used == 10);
    }
    SUBCASE("unstable-direction offsets contract backward, expand forward") {
        const TorusPoint q = exp_map(p, cat_unstable() * 1e-5);
        const ConvergenceExponents r = convergence_exponents(F, p, q, 0, 10);
        CHECK(r.delta == doctest::Approx(kLogLamMinus).epsilon(0.02));
        CHECK(r.theta == doctest::Approx(-kLogLamMinus).epsilon(0.02));
    }
    SUBCASE("immediate saturation yields a positive-infinity sentinel") {
        const TorusPoint q = exp_map(p, cat_unstable() * 0.2);
        const ConvergenceExponents r = convergence_exponents(F, p, q, 0, 20);
        CHECK(std::isinf(r.theta));
        CHECK(r.theta > 0);
        CHECK(r.delta == doctest::Approx(kLogLamMinus).epsilon(0.02));
        CHECK(r.n_used == 0);
    }
    SUBCASE("saturated initial separation is rejected") {
        CHECK_THROWS_AS(
            convergence_exponents(F, TorusPoint{0.0, 0.0}, TorusPoint{0.3, 0.3},
                                  0, 20),
            std::domain_error);
        CHECK_THROWS_AS(convergence_exponents(F, p, p, 0, 0),
                        std::invalid_argument);
    }
}

TEST_CASE("manifold points satisfy the orbit-tube membership criterion") {
    const FamilySpec& F = perturbed_family();
    const LocalManifold Ws = compute_local_manifold(
        F, perturbed_field(), kBase, 0, Subbundle::Stable, 0.01, 20);
    for (double t : {-0.009, -0.003, 0.004, 0.008}) {
        const TorusPoint q = Ws.point_at(t);
        const ConvergenceExponents r = convergence_exponents(F, kBase, q, 0, 12);
        CHECK(r.theta < -0.5);
        TorusPoint xp = kBase, xq = q;
        for (int n = 1; n <= 15; ++n) {
            xp = F.map_at(n - 1).apply(xp);
            xq = F.map_at(n - 1).apply(xq);
            CHECK(dist(xp, xq) <= Ws.K * 0.01);
        }
    }
}

TEST_CASE("limits of manifold point sequences stay on the limit manifold") {
    SUBCASE("linear automorphism, closed-form limit") {
        const FamilySpec F = cat_family();
        const SplittingField S = cat_field(Window{-25, 25}, 4);
        const TorusPoint p{0.3, 0.7};
        std::vector<TorusPoint> p_seq, q_seq;
        for (int m = 1; m <= 6; ++m) {
            const TorusPoint pm = exp_map(p, cat_stable() * (1e-3 / m));
            p_seq.push_back(pm);
            q_seq.push_back(exp_map(pm, cat_unstable() * 0.005));
        }
        p_seq.push_back(p);
        q_seq.push_back(exp_map(p, cat_unstable() * 0.005));
        CHECK(limit_point_closure_check(F, S, 0, Subbundle::Unstable, p_seq,
                                        q_seq, 0.01, 1e-8));
        q_seq.back() = exp_map(q_seq.back(), cat_stable() * 1e-3);
        CHECK_FALSE(limit_point_closure_check(F, S, 0, Subbundle::Unstable,
                                              p_seq, q_seq, 0.01, 1e-6));
    }
    SUBCASE("perturbed family, limit candidate from a nearby base") {
        const FamilySpec& F = perturbed_family();
        const SplittingField& S = perturbed_field();
        std::vector<TorusPoint> p_seq, q_seq;
        const Vec2 es = S.stable(0, kBase);
        for (int m = 0; m <= 5; ++m) {
            const TorusPoint pm =
                exp_map(kBase, es * (4e-4 * std::pow(0.5, m)));
            p_seq.push_back(pm);
            const LocalManifold Wm = compute_local_manifold(
                F, S, pm, 0, Subbundle::Unstable, 0.01, 20);
            q_seq.push_back(Wm.point_at(0.005));
        }
        p_seq.push_back(kBase);
        q_seq.push_back(q_seq.back());
        CHECK(limit_point_closure_check(F, S, 0, Subbundle::Unstable, p_seq,
                                        q_seq, 0.01, 1e-4));
        CHECK_THROWS_AS(limit_point_closure_check(F, S, 0, Subbundle::Unstable,
                                                  {}, q_seq, 0.01, 1e-4),
                        std::invalid_argument);
    }
}

TEST_CASE("manifold construction validates its inputs and frame supply") {
    const FamilySpec F = cat_family();
    const SplittingField S = cat_field(Window{-25, 25}, 4);
    const TorusPoint p{0.3, 0.7};
    const auto build = [&](double delta, int iters, int samples, double alpha) {
        return compute_local_manifold(F, S, p, 0, Subbundle::Unstable, delta,
                                      iters, samples, alpha);
    };
    CHECK_THROWS_AS(build(0.0, 20, 33, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(build(0.3, 20, 33, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(build(0.01, 0, 33, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(build(0.01, 20, 4, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(build(0.01, 20, 3, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(build(0.01, 20, 33, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build(0.01, 20, 33, 1.0), std::invalid_argument);

    const SplittingField narrow = cat_field(Window{0, 5}, 4);
    CHECK_THROWS_AS(compute_local_manifold(F, narrow, p, 0, Subbundle::Unstable,
                                           0.01, 3),
                    std::invalid_argument);
    CHECK_NOTHROW(compute_local_manifold(F, narrow, p, 0, Subbundle::Stable,
                                         0.01, 3));

    SUBCASE("a contracting frame direction cannot cover the graph radius") {
        const SplittingField swapped = SplittingField::constant(
            Window{-25, 25}, 4, cat_unstable(), cat_stable());
        CHECK_THROWS_AS(compute_local_manifold(F, swapped, p, 0,
                                               Subbundle::Unstable, 0.01, 5),
                        std::runtime_error);
    }
    SUBCASE("a rotated frame pushes the graph slope out of a tight cone") {
        const SplittingField rotated = SplittingField::constant(
            Window{-25, 25}, 4, canonical_direction(rotate(cat_stable(), 0.3)),
            canonical_direction(rotate(cat_unstable(), 0.3)));
        CHECK_THROWS_AS(compute_local_manifold(F, rotated, p, 0,
                                               Subbundle::Unstable, 0.01, 20,
                                               33, 0.2),
                        std::runtime_error);
        const LocalManifold M = compute_local_manifold(
            F, rotated, p, 0, Subbundle::Unstable, 0.01, 20, 33, 0.4);
        CHECK(M.tangency == doctest::Approx(0.30933624960962325).epsilon(1e-3));
    }
}

TEST_CASE("graph-radius smallness threshold evaluates the three-term minimum") {
    CHECK(manifold_smallness_bound(0.618, 0.2, 0.5) ==
          doctest::Approx(0.10614527148507731).epsilon(1e-14));
    CHECK(manifold_smallness_bound(0.9, 0.05, 0.85) ==
          doctest::Approx(0.009574200050390527).epsilon(1e-13));

    SUBCASE("matches an independent recomputation on a parameter sweep") {
        for (double lt : {0.3, 0.5, 0.7, 0.9}) {
            const double cap = (1.0 / lt - 1.0) / 2.0;
            for (double a : {0.2 * cap, 0.6 * cap, cap}) {
                for (double frac : {0.25, 0.75}) {
                    const double g = lt * lt + frac * (1.0 - lt * lt);
                    const double t1 =
                        (1.0 / lt - lt) * a / ((1.0 + a) * (1.0 + a));
                    const double t2 =
                        (g / lt - lt) / ((1.0 + a) * (1.0 + g));
                    const double t3 = (1.0 - lt) / (1.0 + lt);
                    const double expect = std::min({t1, t2, t3});
                    CHECK(manifold_smallness_bound(lt, a, g) ==
                          doctest::Approx(expect).epsilon(1e-13));
                    CHECK(manifold_smallness_bound(lt, a, g) > 0.0);
                }
            }
        }
    }
    SUBCASE("rejects parameters outside the admissible ranges") {
        CHECK_THROWS_AS(manifold_smallness_bound(1.0, 0.2, 0.5),
                        std::invalid_argument);
        CHECK_THROWS_AS(manifold_smallness_bound(0.0, 0.2, 0.5),
                        std::invalid_argument);
        CHECK_THROWS_AS(manifold_smallness_bound(0.618, 0.0, 0.5),
                        std::invalid_argument);
        CHECK_THROWS_AS(manifold_smallness_bound(0.618, 0.31, 0.5),
                        std::invalid_argument);
        CHECK_NOTHROW(manifold_smallness_bound(0.618, 0.3090614886731392, 0.5));
        CHECK_THROWS_AS(manifold_smallness_bound(0.618, 0.2, 0.381924),
                        std::invalid_argument);
        CHECK_THROWS_AS(manifold_smallness_bound(0.618, 0.2, 1.0),
                        std::invalid_argument);
    }
}
