#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msfi/rng.hpp"
#include "msfi/weights.hpp"
#include "support/golden.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace msfi;
using namespace msfi::weights;
using msfi::testsupport::simpson_oracle;
using msfi::testsupport::simpson_oracle_to_inf;

TEST_CASE("eval_weight matches the family formulas") {
    CHECK(eval_weight(WeightFamily::algebraic(2.0), 1.0) == doctest::Approx(0.125).epsilon(1e-14));
    CHECK(eval_weight(WeightFamily::stretched_exp(1.0, 1.0), 0.0) == 1.0);
    CHECK(eval_weight(WeightFamily::compact(3.0), 5.0) == 0.0);
    CHECK(eval_weight(WeightFamily::compact(3.0), 3.0) == 1.0);
    CHECK(eval_weight(WeightFamily::algebraic(2.0, 3.0), 1.0) ==
          doctest::Approx(0.375).epsilon(1e-14));
    CHECK_THROWS_AS(eval_weight(WeightFamily::algebraic(2.0), -0.5), std::invalid_argument);
    CHECK_THROWS_AS(WeightFamily::algebraic(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(WeightFamily::stretched_exp(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("tail_integral closed forms") {
    CHECK(tail_integral(WeightFamily::algebraic(2.0), 1.0) ==
          doctest::Approx(0.125).epsilon(1e-12));
    CHECK(tail_integral(WeightFamily::stretched_exp(1.0, 1.0), 2.0) ==
          doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(tail_integral(WeightFamily::compact(3.0), 1.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(tail_integral(WeightFamily::compact(3.0), 5.0) == 0.0);
}

TEST_CASE("tail_integral derived value: stretched exponential beta = 2") {
    auto entry = testsupport::golden("weights.tail_integral.stretched_exp_beta2_c1_r1");
    auto w = WeightFamily::stretched_exp(2.0, 1.0);
    // Recompute by the named oracle first.
    double oracle = simpson_oracle_to_inf([](double s) { return std::exp(-s * s); }, 1.0);
    CHECK(oracle == doctest::Approx(entry.value).epsilon(entry.tolerance_rel));
    double closed = 0.5 * std::sqrt(std::acos(-1.0)) * std::erfc(1.0);
    CHECK(closed == doctest::Approx(entry.value).epsilon(entry.tolerance_rel));
    CHECK(tail_integral(w, 1.0) == doctest::Approx(entry.value).epsilon(entry.tolerance_rel));
    CHECK(tail_integral_quadrature(w, 1.0) ==
          doctest::Approx(entry.value).epsilon(entry.tolerance_rel));
}

TEST_CASE("closed-form and quadrature tail routes agree on random families") {
    Philox rng(20240817ull, 0);
    for (int trial = 0; trial < 100; ++trial) {
        WeightFamily w;
        double norm = 0.5 + 1.5 * rng.next_double();
        switch (rng.next_u64() % 3) {
            case 0:
                w = WeightFamily::algebraic(0.3 + 3.7 * rng.next_double(), norm);
                break;
            case 1:
                w = WeightFamily::stretched_exp(rng.next_u64() % 2 ? 1.0 : 2.0,
                                                0.5 + 2.5 * rng.next_double(), norm);
                break;
            default:
                w = WeightFamily::compact(0.5 + 9.5 * rng.next_double(), norm);
                break;
        }
        double r = 8.0 * rng.next_double();
        double closed = tail_integral(w, r);
        double quad = tail_integral_quadrature(w, r);
        CHECK(quad == doctest::Approx(closed).epsilon(1e-8));
    }
}

TEST_CASE("tail_integral is nonincreasing and vanishes at infinity") {
    for (const auto& w :
         {WeightFamily::algebraic(0.5), WeightFamily::algebraic(2.5),
          WeightFamily::stretched_exp(1.0, 2.0), WeightFamily::stretched_exp(2.0, 1.0),
          WeightFamily::compact(4.0)}) {
        double prev = tail_integral(w, 0.0);
        for (double r : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0}) {
            double cur = tail_integral(w, r);
            CHECK(cur <= prev + 1e-15);
            prev = cur;
        }
        CHECK(tail_integral(w, 1e8) < 1e-2 * tail_integral(w, 0.0));
    }
}

TEST_CASE("tail_integral at 0 equals the quadrature of the weight over [0, inf)") {
    for (const auto& w : {WeightFamily::algebraic(1.5), WeightFamily::stretched_exp(1.0, 1.0),
                          WeightFamily::stretched_exp(2.0, 0.7)}) {
        double full = simpson_oracle_to_inf([&](double s) { return eval_weight(w, s); }, 0.0);
        CHECK(tail_integral(w, 0.0) == doctest::Approx(full).epsilon(1e-8));
    }
    auto compact = WeightFamily::compact(4.0);
    CHECK(tail_integral(compact, 0.0) == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("pi_star golden values in d = 1") {
    DimensionContext ctx(1);
    auto w = WeightFamily::algebraic(2.0);

    auto at0 = testsupport::golden("weights.pi_star.d1_algebraic_beta2_ell0");
    CHECK(pi_star(w, ctx, 0.0) == doctest::Approx(at0.value).epsilon(at0.tolerance_rel));

    auto at4 = testsupport::golden("weights.pi_star.d1_algebraic_beta2_ell4");
    // Oracle: independent Simpson quadrature of the ball average of the tail.
    double avg = simpson_oracle([](double r) { return 0.5 * std::pow(r + 1.0, -2.0); }, 0.0, 4.0) / 4.0;
    CHECK(1.0 / avg == doctest::Approx(at4.value).epsilon(at4.tolerance_rel));
    CHECK(pi_star(w, ctx, 4.0) == doctest::Approx(at4.value).epsilon(at4.tolerance_rel));
}

TEST_CASE("pi_star is nondecreasing in ell") {
    for (int d = 1; d <= 3; ++d) {
        DimensionContext ctx(d);
        for (const auto& w : {WeightFamily::algebraic(0.5), WeightFamily::algebraic(3.0),
                              WeightFamily::stretched_exp(1.0, 1.0), WeightFamily::compact(2.0)}) {
            double prev = pi_star(w, ctx, 0.0);
            for (double ell : {0.25, 1.0, 3.0, 10.0, 40.0, 200.0}) {
                double cur = pi_star(w, ctx, ell);
                CHECK(cur >= prev * (1.0 - 1e-9));
                prev = cur;
            }
        }
    }
}

TEST_CASE("pi_star tracks its asymptotic equivalent for algebraic weights") {
    // beta < d case in d = 2, plus the generic bracket over a wide range.
    DimensionContext ctx2(2);
    auto w = WeightFamily::algebraic(1.0);
    for (double ell : {1.0, 10.0, 100.0, 1000.0}) {
        double ratio = pi_star(w, ctx2, ell) / pi_star_asymptotic(1.0, ctx2, ell);
        CHECK(ratio >= 0.1);
        CHECK(ratio <= 10.0);
    }
    DimensionContext ctx1(1);
    for (double beta : {0.5, 1.0, 2.0}) {
        auto wa = WeightFamily::algebraic(beta);
        for (double ell : {1.0, 10.0, 100.0, 1000.0}) {
            double ratio = pi_star(wa, ctx1, ell) / pi_star_asymptotic(beta, ctx1, ell);
            CHECK(ratio >= 0.1);
            CHECK(ratio <= 10.0);
        }
    }
}

TEST_CASE("pi_star_asymptotic case table") {
    CHECK(pi_star_asymptotic(1.0, DimensionContext(2), 7.0) == doctest::Approx(8.0));
    CHECK(pi_star_asymptotic(3.0, DimensionContext(1), 0.0) == doctest::Approx(1.0));
    double e = std::exp(1.0);
    CHECK(pi_star_asymptotic(1.0, DimensionContext(1), e - 2.0) ==
          doctest::Approx(e - 1.0).epsilon(1e-12));
}

TEST_CASE("DimensionContext validates d and carries the unit-ball volume") {
    CHECK(DimensionContext(1).ball_volume_unit == doctest::Approx(2.0));
    CHECK(DimensionContext(2).ball_volume_unit == doctest::Approx(std::acos(-1.0)));
    CHECK(DimensionContext(3).ball_volume_unit ==
          doctest::Approx(4.0 * std::acos(-1.0) / 3.0));
    CHECK_THROWS_AS(DimensionContext(4), std::invalid_argument);
    CHECK_THROWS_AS(DimensionContext(0), std::invalid_argument);
}
