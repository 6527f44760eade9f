#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "anosov/multiplicative.hpp"

using namespace anosov;

TEST_CASE("periodic continued fractions hit the classical surds") {
    const IntSeqSpec ones = IntSeqSpec::periodic({1});
    const IntSeqSpec twos = IntSeqSpec::periodic({2});
    const IntSeqSpec onetwo = IntSeqSpec::periodic({1, 2});
    // [1,1,1,...] = (sqrt(5)-1)/2, [2,2,2,...] = sqrt(2)-1,
    // [1,2,1,2,...] = sqrt(3)-1.
    CHECK(cf_surd(ones, 0, +1) == doctest::Approx(0.6180339887498949).epsilon(1e-15));
    CHECK(cf_surd(twos, 5, -1) == doctest::Approx(0.41421356237309515).epsilon(1e-15));
    CHECK(cf_surd(onetwo, 0, +1) == doctest::Approx(0.7320508075688772).epsilon(1e-15));
    // Starting at the 2 shifts the expansion: [2,1,2,1,...] = (sqrt(3)-1)/2.
    CHECK(cf_surd(onetwo, 1, +1) ==
          doctest::Approx(0.5 * 0.7320508075688772).epsilon(1e-14));
}

TEST_CASE("adaptive evaluation agrees with the surds below 1e-13") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long> E(1, 9);
    std::uniform_int_distribution<int> L(1, 6);
    for (int t = 0; t < 40; ++t) {
        std::vector<long> entries;
        const int len = L(rng);
        for (int k = 0; k < len; ++k) entries.push_back(E(rng));
        const IntSeqSpec seq = IntSeqSpec::periodic(entries);
        for (long start = -2; start <= 2; ++start) {
            for (int step : {+1, -1}) {
                const CFValue v = cf_value(seq, start, step);
                CHECK(v.error_bound < 1e-13);
                CHECK(std::fabs(v.value - cf_surd(seq, start, step)) < 2e-13);
            }
        }
    }
}

TEST_CASE("truncation error bound shrinks and brackets the limit") {
    const IntSeqSpec seq = IntSeqSpec::word(0, {3, 1, 4, 1, 5}, 1, 2);
    double prev_bound = 1e300;
    const double limit = cf_value(seq, 0, +1, 1e-15).value;
    for (int depth = 4; depth <= 40; depth += 4) {
        const CFValue v = cf_eval(seq, 0, +1, depth);
        CHECK(v.error_bound < prev_bound);
        CHECK(std::fabs(v.value - limit) <= v.error_bound * (1.0 + 1e-12));
        prev_bound = v.error_bound;
    }
}

TEST_CASE("splitting frame satisfies the exact transfer relations") {
    const IntSeqSpec seq = IntSeqSpec::periodic({1, 2, 3});
    const MultiplicativeFamily mf = build_multiplicative(seq);
    CHECK(mf.family.period() == 6);  // lcm(3, 2) keeps shear parity aligned
    const SplittingData& D = mf.data;
    for (long i = D.window.lo; i < D.window.hi; ++i) {
        const Mat2 A = shear_matrix(seq, i).to_mat2();
        const double li = D.lambda[D.idx(i)];
        const Vec2 As = A * D.s[D.idx(i)];
        const Vec2 ls = D.s[D.idx(i + 1)] * li;
        CHECK((As - ls).norm() < 1e-12);
        const Vec2 Au = A * D.u[D.idx(i)];
        const Vec2 lu = D.u[D.idx(i + 1)] * (1.0 / li);
        CHECK((Au - lu).norm() < 1e-12);
    }
    for (long i = D.window.lo; i <= D.window.hi; ++i) {
        const std::size_t k = D.idx(i);
        // Normalisation det[(a, -b) | (c, d)] = a d + b c = 1.
        CHECK(D.a[k] * D.d[k] + D.b[k] * D.c[k] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(D.c[k] > 0.0);
        CHECK(D.lambda[k] > 0.0);
        CHECK(D.lambda[k] < 1.0);
        CHECK(D.s[k].norm() > 0.5);
        CHECK(D.s[k].norm() < std::sqrt(2.0) + 1e-12);
        CHECK(D.u[k].norm() > 0.5);
        CHECK(D.u[k].norm() < std::sqrt(2.0) + 1e-12);
    }
    CHECK(D.c_const_exact);
    CHECK(D.c_const >= 1.0);
}

TEST_CASE("growth bounds certify for periodic and word sequences") {
    const Certificate c1 =
        verify_growth_bounds(IntSeqSpec::periodic({1}), Window{0, 11}, 40);
    CHECK(c1.status == CertStatus::Certified);
    CHECK(c1.constants.at("lambda_ref") ==
          doctest::Approx(0.816496580927726).epsilon(1e-15));
    CHECK(c1.constants.at("min_margin_product") >= 1.0);

    const Certificate c2 = verify_growth_bounds(
        IntSeqSpec::periodic({2, 1, 1, 3, 2}), Window{-10, 10}, 30);
    CHECK(c2.status == CertStatus::Certified);

    const Certificate c3 = verify_growth_bounds(
        IntSeqSpec::word(-2, {5, 1, 2, 1, 8}, 1, 2), Window{-12, 12}, 25);
    CHECK(c3.status == CertStatus::Certified);
    CHECK_FALSE(c3.notes.empty());  // sampled c_const is flagged
}

TEST_CASE("rates above 2/3 force small neighbours") {
    // Alternating 1,3 produces lambda ~ 0.79 at the odd-entry positions.
    const Certificate cert =
        neighbor_rate_check(IntSeqSpec::periodic({1, 3}), Window{-20, 20});
    CHECK(cert.status == CertStatus::Certified);
    CHECK(cert.constants.at("triggered") > 0.0);
    for (const Witness& w : cert.witnesses) {
        CHECK(w.scalars.at("lambda_j") > 2.0 / 3.0);
        CHECK(w.scalars.at("lambda_prev") < 2.0 / 3.0);
        CHECK(w.scalars.at("lambda_next") < 0.5);
        CHECK(w.scalars.at("entry_j") == doctest::Approx(1.0));
        CHECK(w.scalars.at("entry_next") >= 2.0);
    }
    // Random sequences never violate the rule.
    std::mt19937_64 rng(43);
    std::uniform_int_distribution<long> E(1, 6);
    for (int t = 0; t < 25; ++t) {
        std::vector<long> entries;
        for (int k = 0; k < 7; ++k) entries.push_back(E(rng));
        const Certificate c =
            neighbor_rate_check(IntSeqSpec::periodic(entries), Window{0, 13});
        CHECK(c.status == CertStatus::Certified);
    }
}

TEST_CASE("factorization of unimodular nonnegative matrices") {
    const GeneratorWord w1 = factorize_sl2n(IntMat2{2, 1, 1, 1});
    CHECK(w1.first_is_upper);
    CHECK(w1.exponents == std::vector<long long>{1, 1});

    const GeneratorWord w2 = factorize_sl2n(IntMat2{3, 1, 2, 1});
    CHECK(w2.first_is_upper);
    CHECK(w2.exponents == std::vector<long long>{1, 2});

    const GeneratorWord w3 = factorize_sl2n(IntMat2{1, 0, 5, 1});
    CHECK_FALSE(w3.first_is_upper);
    CHECK(w3.exponents == std::vector<long long>{5});
    CHECK_FALSE(w3.ends_nonzero);

    // Lower-then-upper words match the canonical template shape.
    const GeneratorWord w4 = factorize_sl2n(IntMat2{1, 1, 1, 2});
    CHECK_FALSE(w4.first_is_upper);
    CHECK(w4.exponents == std::vector<long long>{1, 1});
    CHECK(w4.ends_nonzero);

    CHECK_THROWS_AS((void)factorize_sl2n(IntMat2{1, 0, 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS((void)factorize_sl2n(IntMat2{2, 1, 1, 1}.inverse_unimodular()),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)factorize_sl2n(IntMat2{2, 0, 0, 1}), std::invalid_argument);
}

TEST_CASE("factorization round-trips random alternating words") {
    std::mt19937_64 rng(59);
    std::uniform_int_distribution<long long> E(1, 6);
    std::uniform_int_distribution<int> L(1, 8);
    std::uniform_int_distribution<int> B(0, 1);
    for (int t = 0; t < 200; ++t) {
        GeneratorWord w;
        w.first_is_upper = B(rng) == 1;
        const int len = L(rng);
        for (int k = 0; k < len; ++k) w.exponents.push_back(E(rng));
        const IntMat2 F = reconstruct(w);
        const GeneratorWord back = factorize_sl2n(F);
        CHECK(back.first_is_upper == w.first_is_upper);
        CHECK(back.exponents == w.exponents);
        CHECK(reconstruct(back) == F);
    }
    // Long words with large exponents stay inside 64-bit range.
    GeneratorWord big;
    big.first_is_upper = false;
    for (int k = 0; k < 10; ++k) big.exponents.push_back(20);
    const IntMat2 F = reconstruct(big);
    CHECK(F.det() == 1);
    const GeneratorWord back = factorize_sl2n(F);
    CHECK(back.exponents == big.exponents);
}

TEST_CASE("gathering the all-ones family in pairs yields the hyperbolic block") {
    const MultiplicativeFamily mf = build_multiplicative(IntSeqSpec::periodic({1}));
    CHECK(mf.family.period() == 2);
    GatherSpec spec;
    spec.origin = 0;
    spec.block_lengths = {2};
    const FamilySpec G = gather(mf.family, spec);
    CHECK(G.period() == 1);
    const TorusMap& block = G.map_at(0);
    CHECK(block.linear());
    CHECK(block.linear_product() == IntMat2{2, 1, 1, 1});
}

TEST_CASE("word-driven families index their shears consistently") {
    const IntSeqSpec seq = IntSeqSpec::word(-1, {4, 7, 2}, 1, 3);
    const MultiplicativeFamily mf = build_multiplicative(seq, 10);
    CHECK(mf.family.period() == 0);
    for (long i = -8; i <= 8; ++i) {
        const TorusMap& m = mf.family.map_at(i);
        CHECK(m.linear());
        CHECK(m.linear_product() == shear_matrix(seq, i));
    }
    CHECK(mf.data.window.lo == -11);
    CHECK(mf.data.window.hi == 11);
    CHECK_FALSE(mf.data.c_const_exact);
}
