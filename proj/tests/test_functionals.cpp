#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msfi/common.hpp"
#include "msfi/functionals.hpp"
#include "msfi/rng.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace msfi;
using namespace msfi::fieldgen;
using namespace msfi::functionals;
using msfi::testsupport::naive_spatial_average;
using msfi::testsupport::simpson_oracle;

namespace {

GridSpec grid1d(int N, double h = 1.0) {
    GridSpec g;
    g.d = 1;
    g.N = N;
    g.h = h;
    return g;
}

FieldSample constant_field(const GridSpec& g, double c) {
    FieldSample A;
    A.grid = g;
    A.values.assign(g.cells(), c);
    A.model_tag = "constant";
    return A;
}

FieldSample random_field(const GridSpec& g, std::uint64_t seed) {
    FieldSample A = constant_field(g, 0.0);
    Philox rng(seed, 0);
    for (auto& v : A.values) v = rng.next_normal();
    return A;
}

FieldSample shifted(const FieldSample& A, int shift) {
    FieldSample B = A;
    const auto& g = A.grid;
    for (int i = 0; i < g.N; ++i) {
        B.values[i] = A.values[((i + shift) % g.N + g.N) % g.N];
    }
    return B;
}

}  // namespace

TEST_CASE("transform_field basics") {
    auto g = grid1d(32, 0.5);
    auto A = random_field(g, 1);

    auto ident = transform_field(LocalFunctional::cell_value(), A);
    CHECK(ident.values == A.values);

    auto C = constant_field(g, 3.25);
    auto avg = transform_field(LocalFunctional::ball_average(1.0), C);
    for (double v : avg.values) CHECK(v == doctest::Approx(3.25).epsilon(1e-15));

    auto ones = constant_field(g, 1.0);
    auto thr = transform_field(LocalFunctional::threshold(1.0, 0.5), ones);
    for (double v : thr.values) CHECK(v == 1.0);

    CHECK_THROWS_AS(transform_field(LocalFunctional::ball_average(9.0), A),
                    std::invalid_argument);
}

TEST_CASE("transform_field commutes with torus translation") {
    auto g = grid1d(32, 0.5);
    auto A = random_field(g, 2);
    int shift = 7;

    auto f_cell = LocalFunctional::cell_value();
    CHECK(transform_field(f_cell, shifted(A, shift)).values ==
          shifted(transform_field(f_cell, A), shift).values);

    auto f_ball = LocalFunctional::ball_average(1.0);
    auto lhs = transform_field(f_ball, shifted(A, shift));
    auto rhs = shifted(transform_field(f_ball, A), shift);
    for (std::size_t i = 0; i < lhs.values.size(); ++i) {
        CHECK(lhs.values[i] == doctest::Approx(rhs.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("spatial_average hand values") {
    auto g = grid1d(16, 0.5);
    auto C = constant_field(g, 2.5);
    CHECK(spatial_average(C, 2.5, 3.0, AverageKind::ExpKernel).value ==
          doctest::Approx(0.0).epsilon(1e-15));
    CHECK(spatial_average(C, 2.5, 3.0, AverageKind::Box).value ==
          doctest::Approx(0.0).epsilon(1e-15));

    // Single nonzero cell at the origin: exp kernel picks h v / L.
    auto F = constant_field(g, 0.0);
    F.values[0] = 4.0;
    double L = 2.0;
    CHECK(spatial_average(F, 0.0, L, AverageKind::ExpKernel).value ==
          doctest::Approx(g.h * 4.0 / L).epsilon(1e-14));
}

TEST_CASE("spatial_average agrees with the naive double-loop oracle") {
    auto g = grid1d(64, 0.5);
    auto F = random_field(g, 3);
    for (double L : {1.0, 4.0, 7.5}) {
        for (auto kind : {AverageKind::ExpKernel, AverageKind::Box}) {
            double lib = spatial_average(F, 0.3, L, kind).value;
            double oracle = naive_spatial_average(F, 0.3, L, kind);
            CHECK(lib == doctest::Approx(oracle).epsilon(1e-12));
        }
    }
}

TEST_CASE("spatial_average box contains exactly L/h cells for aligned L") {
    auto g = grid1d(16);
    // Mean of k cells: put 1 in every cell, mean_F = 0 -> average is 1.
    auto ones = constant_field(g, 1.0);
    for (int k : {1, 2, 3, 4, 8}) {
        double val = spatial_average(ones, 0.0, double(k), AverageKind::Box).value;
        CHECK(val == doctest::Approx(1.0).epsilon(1e-15));
    }
    // Variance bookkeeping check: one marked cell, k-cell box centered at 0.
    auto mark = constant_field(g, 0.0);
    mark.values[0] = 1.0;
    CHECK(spatial_average(mark, 0.0, 4.0, AverageKind::Box).value ==
          doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("spatial_average linearity and shift-centering") {
    auto g = grid1d(32, 0.5);
    auto F1 = random_field(g, 4);
    auto F2 = random_field(g, 5);
    double a = 1.7, b = -0.4, m1 = 0.2, m2 = -0.6;
    for (auto kind : {AverageKind::ExpKernel, AverageKind::Box}) {
        FieldSample combo = F1;
        for (std::size_t i = 0; i < combo.values.size(); ++i) {
            combo.values[i] = a * F1.values[i] + b * F2.values[i];
        }
        double lhs = spatial_average(combo, a * m1 + b * m2, 3.0, kind).value;
        double rhs = a * spatial_average(F1, m1, 3.0, kind).value +
                     b * spatial_average(F2, m2, 3.0, kind).value;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

        FieldSample shifted_F = F1;
        for (auto& v : shifted_F.values) v += 5.0;
        CHECK(spatial_average(shifted_F, m1 + 5.0, 3.0, kind).value ==
              doctest::Approx(spatial_average(F1, m1, 3.0, kind).value).epsilon(1e-12));
    }
}

TEST_CASE("bounded functionals keep the box average within 2 C0") {
    auto g = grid1d(64, 0.5);
    auto f = LocalFunctional::threshold(1.0, 0.4);
    REQUIRE(f.bound().has_value());
    double c0 = *f.bound();
    auto model = FieldModel::boolean(g, 0.4, RadiusLaw::fixed(1.0));
    for (int rep = 0; rep < 25; ++rep) {
        auto A = sample_field(model, replicate_seed(71, rep));
        auto F = transform_field(f, A);
        for (double mean_F : {0.0, 0.5, 1.0}) {
            double v = spatial_average(F, mean_F, 6.0, AverageKind::Box).value;
            CHECK(std::abs(v) <= 2.0 * c0 + 1e-12);
        }
    }
}

TEST_CASE("kernel truncation flag fires beyond the half-side") {
    auto g = grid1d(16);
    auto F = constant_field(g, 1.0);
    CHECK_FALSE(spatial_average(F, 0.0, 8.0, AverageKind::ExpKernel).truncated);
    CHECK(spatial_average(F, 0.0, 8.5, AverageKind::ExpKernel).truncated);
}

TEST_CASE("locality defect: exactly local functionals see nothing far away") {
    auto g = grid1d(32);
    auto model = FieldModel::block_iid(g, 2, BlockLaw::bernoulli(0.5));

    // ell at 1 + block diameter margin: exterior redraws cannot reach B_1.
    auto f = LocalFunctional::ball_average(1.0);
    auto far = locality_defect(f, model, 1.0 + 2.0 + 1.0, 20, 101);
    CHECK(far.value == 0.0);
    CHECK(far.flags.count("max-statistic") == 1);

    // ell = 0 resamples everything: the cell value flips with prob 1/2.
    auto cell = LocalFunctional::cell_value();
    auto zero = locality_defect(cell, model, 0.0, 40, 102);
    CHECK(zero.value == 1.0);

    // Defect is nonincreasing in ell.
    auto d1 = locality_defect(f, model, 1.0, 60, 103);
    auto d2 = locality_defect(f, model, 2.0, 60, 103);
    auto d3 = locality_defect(f, model, 3.0, 60, 103);
    CHECK(d1.value >= d2.value);
    CHECK(d2.value >= d3.value);

    // Correlated Gaussian models have no conditional resampling.
    auto lr = FieldModel::gaussian(g, CovarianceModel::algebraic_decay(1.0, 0.5));
    CHECK_THROWS_WITH_AS(locality_defect(cell, lr, 1.0, 10, 104),
                         doctest::Contains("unsupported"), std::runtime_error);
}

TEST_CASE("derivative_profile closed form and integral envelope") {
    weights::DimensionContext ctx1(1);
    CHECK(derivative_profile(3.0, 0.0, 4.0, ctx1, 1.0) == doctest::Approx(1.0));
    CHECK(derivative_profile(0.0, 0.0, 4.0, ctx1, 1.0) == doctest::Approx(0.25));

    // Nonincreasing in x.
    double prev = derivative_profile(1.0, 0.0, 8.0, ctx1, 2.0);
    for (double x : {1.0, 2.0, 5.0, 20.0}) {
        double cur = derivative_profile(1.0, x, 8.0, ctx1, 2.0);
        CHECK(cur <= prev);
        prev = cur;
    }

    // Radial integral against the closed-form envelope, d = 1:
    // int_R profile dx = 2 * L^-1 min(L, ell+1) * C (L+ell+1).
    for (double ell : {0.0, 2.0, 10.0}) {
        for (double L : {2.0, 8.0}) {
            double c_loc = 1.5;
            double integral =
                2.0 * simpson_oracle(
                          [&](double x) { return derivative_profile(ell, x, L, ctx1, c_loc); },
                          0.0, 2000.0);
            double envelope = std::pow(std::min(L, ell + 1.0) / L, 1.0) *
                              (c_loc * (L + ell + 1.0)) * 2.0;
            CHECK(integral == doctest::Approx(envelope).epsilon(1e-6));
        }
    }
}
