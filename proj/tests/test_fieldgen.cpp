#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msfi/common.hpp"
#include "msfi/fieldgen.hpp"
#include "msfi/rng.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace msfi;
using namespace msfi::fieldgen;
using msfi::testsupport::direct_wrapped_covariance;

namespace {

GridSpec grid1d(int N, double h = 1.0) {
    GridSpec g;
    g.d = 1;
    g.N = N;
    g.h = h;
    return g;
}

struct MeanSE {
    double mean;
    double se;
};

// Mean and standard error of a per-replicate statistic.
template <typename Fn>
MeanSE replicate_stat(int replicates, std::uint64_t seed, Fn&& stat) {
    std::vector<double> values(replicates);
    for (int r = 0; r < replicates; ++r) {
        values[r] = stat(replicate_seed(seed, r));
    }
    double mean = kahan_total(values) / replicates;
    double sq = 0.0;
    for (double v : values) sq += (v - mean) * (v - mean);
    double se = std::sqrt(sq / (replicates - 1.0)) / std::sqrt(double(replicates));
    return {mean, se};
}

double lag_product_avg(const FieldSample& A, int lag_cells) {
    const auto& g = A.grid;
    KahanSum sum;
    for (int i = 0; i < g.N; ++i) {
        sum.add(A.values[i] * A.values[(i + lag_cells) % g.N]);
    }
    return sum.value() / g.N;
}

}  // namespace

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(grid1d(100).validate(), std::invalid_argument);  // not a power of two
    CHECK_THROWS_AS(grid1d(0).validate(), std::invalid_argument);
    GridSpec g3;
    g3.d = 3;
    g3.N = 1024;  // 2^30 cells
    CHECK_THROWS_AS(g3.validate(), std::invalid_argument);
    GridSpec ok;
    ok.d = 2;
    ok.N = 64;
    CHECK_NOTHROW(ok.validate());
    GridSpec bad_d;
    bad_d.d = 4;
    bad_d.N = 8;
    CHECK_THROWS_AS(bad_d.validate(), std::invalid_argument);
}

TEST_CASE("samplers are pure functions of (spec, seed)") {
    auto g = grid1d(64, 0.5);
    auto cov = CovarianceModel::exponential(1.0, 1.0);
    auto a = sample_gaussian(g, cov, 42);
    auto b = sample_gaussian(g, cov, 42);
    CHECK(a.values == b.values);
    auto c = sample_gaussian(g, cov, 43);
    CHECK(a.values != c.values);

    auto bl = sample_block_iid(g, 4, BlockLaw::bernoulli(0.5), 7);
    auto bl2 = sample_block_iid(g, 4, BlockLaw::bernoulli(0.5), 7);
    CHECK(bl.values == bl2.values);

    auto bo = sample_boolean(g, 0.3, RadiusLaw::fixed(1.0), 9);
    auto bo2 = sample_boolean(g, 0.3, RadiusLaw::fixed(1.0), 9);
    CHECK(bo.values == bo2.values);
}

TEST_CASE("wrapped covariance equals direct image summation") {
    auto g = grid1d(16, 0.5);
    for (const auto& cov :
         {CovarianceModel::exponential(1.0, 1.0), CovarianceModel::exponential(2.0, 0.7),
          CovarianceModel::algebraic_decay(1.0, 2.5), CovarianceModel::delta_lag(1.5)}) {
        for (int m = 0; m < g.N; ++m) {
            double lib = wrapped_covariance(cov, g, {m, 0, 0});
            double oracle = direct_wrapped_covariance(cov, g, {m, 0, 0});
            CHECK(lib == doctest::Approx(oracle).epsilon(1e-11));
        }
    }
    // Algebraic decay: the torus model is the minimal image by definition.
    for (double gamma : {0.5, 2.5}) {
        auto lr = CovarianceModel::algebraic_decay(1.0, gamma);
        CHECK(wrapped_covariance(lr, g, {3, 0, 0}) ==
              doctest::Approx(lr.eval(3 * 0.5)).epsilon(1e-13));
        CHECK(wrapped_covariance(lr, g, {13, 0, 0}) ==
              doctest::Approx(lr.eval(3 * 0.5)).epsilon(1e-13));  // minimal image of 13 is -3
        CHECK_NOTHROW(sample_gaussian(g, lr, 1));
    }
}

TEST_CASE("delta-lag field has independent cells and zero mean") {
    auto g = grid1d(128);
    auto cov = CovarianceModel::delta_lag(1.0);
    auto lag_cov = replicate_stat(200, 11, [&](std::uint64_t s) {
        auto A = sample_gaussian(g, cov, s);
        return lag_product_avg(A, 1);
    });
    CHECK(std::abs(lag_cov.mean) <= 3.0 * lag_cov.se);
    auto mean_stat = replicate_stat(200, 12, [&](std::uint64_t s) {
        auto A = sample_gaussian(g, cov, s);
        return kahan_total(A.values) / double(A.values.size());
    });
    CHECK(std::abs(mean_stat.mean) <= 3.0 * mean_stat.se);
}

TEST_CASE("exponential covariance matches the wrapped oracle at one cell lag") {
    auto g = grid1d(16, 0.5);
    auto cov = CovarianceModel::exponential(1.0, 1.0);
    double target = direct_wrapped_covariance(cov, g, {1, 0, 0});
    auto stat = replicate_stat(200, 13, [&](std::uint64_t s) {
        auto A = sample_gaussian(g, cov, s);
        return lag_product_avg(A, 1);
    });
    CHECK(std::abs(stat.mean - target) <= 3.0 * stat.se);
}

TEST_CASE("expected periodogram equals the clipped spectral coefficients") {
    auto g = grid1d(8);
    auto cov = CovarianceModel::exponential(1.0, 1.5);
    auto spec = spectral_coefficients(cov, g);
    const int replicates = 10000;
    std::vector<double> acc(g.N, 0.0), acc_sq(g.N, 0.0);
    for (int r = 0; r < replicates; ++r) {
        auto A = sample_gaussian(g, cov, replicate_seed(99, r));
        for (int k = 0; k < g.N; ++k) {
            std::complex<double> z = 0.0;
            for (int x = 0; x < g.N; ++x) {
                double angle = -2.0 * std::numbers::pi * k * x / g.N;
                z += A.values[x] * std::complex<double>(std::cos(angle), std::sin(angle));
            }
            double I = std::norm(z) / (double(g.N) * g.N);
            acc[k] += I;
            acc_sq[k] += I * I;
        }
    }
    for (int k = 0; k < g.N; ++k) {
        double mean = acc[k] / replicates;
        double var = acc_sq[k] / replicates - mean * mean;
        double se = std::sqrt(var / replicates);
        CHECK(std::abs(mean - spec[k]) <= 5.0 * se);
    }
}

TEST_CASE("boolean model: empty process, coverage formula, monotone coupling") {
    auto g = grid1d(64, 0.5);
    auto zero = sample_boolean(g, 0.0, RadiusLaw::fixed(1.0), 5);
    for (double v : zero.values) CHECK(v == 0.0);

    // 2 lambda r = 1 -> coverage 1 - exp(-1); exact on the torus as 2r < Nh.
    double lambda = 0.5, r = 1.0;
    auto cover = replicate_stat(200, 21, [&](std::uint64_t s) {
        auto A = sample_boolean(g, lambda, RadiusLaw::fixed(r), s);
        return kahan_total(A.values) / double(A.values.size());
    });
    double target = 1.0 - std::exp(-1.0);
    CHECK(std::abs(cover.mean - target) <= 3.0 * cover.se);

    FieldModel model = FieldModel::boolean(g, lambda, RadiusLaw::fixed(r));
    REQUIRE(model.analytic_mean().has_value());
    CHECK(*model.analytic_mean() == doctest::Approx(target).epsilon(1e-12));

    // Shared seed couples the point sets; coverage is monotone in lambda.
    for (int rep = 0; rep < 20; ++rep) {
        std::uint64_t s = replicate_seed(31, rep);
        auto low = sample_boolean(g, 0.2, RadiusLaw::fixed(r), s);
        auto high = sample_boolean(g, 0.6, RadiusLaw::fixed(r), s);
        for (std::size_t i = 0; i < low.values.size(); ++i) {
            CHECK(low.values[i] <= high.values[i]);
        }
    }
}

TEST_CASE("boolean model rejects pareto tails with a <= d") {
    auto g = grid1d(32);
    CHECK_THROWS_AS(sample_boolean(g, 0.5, RadiusLaw::pareto_tail(1.0, 1.0), 3),
                    std::invalid_argument);
    CHECK_NOTHROW(sample_boolean(g, 0.1, RadiusLaw::pareto_tail(0.5, 2.5), 3));
}

TEST_CASE("block field: marginals, independence across blocks, divisibility") {
    auto g = grid1d(64);
    CHECK_THROWS_AS(sample_block_iid(g, 3, BlockLaw::bernoulli(0.5), 1), std::invalid_argument);

    auto mean_stat = replicate_stat(200, 41, [&](std::uint64_t s) {
        auto A = sample_block_iid(g, 4, BlockLaw::bernoulli(0.5), s);
        return kahan_total(A.values) / double(A.values.size());
    });
    CHECK(std::abs(mean_stat.mean - 0.5) <= 3.0 * mean_stat.se);

    // Lag beyond the block diameter: distinct blocks, centered product.
    auto far = replicate_stat(200, 42, [&](std::uint64_t s) {
        auto A = sample_block_iid(g, 4, BlockLaw::bernoulli(0.5), s);
        return lag_product_avg(A, 5) - 0.25;
    });
    CHECK(std::abs(far.mean) <= 3.0 * far.se);

    auto A = sample_block_iid(g, 8, BlockLaw::uniform_pm1(), 17);
    for (int i = 0; i < g.N; ++i) {
        CHECK(A.values[i] == A.values[(i / 8) * 8]);
    }
}

TEST_CASE("stationarity: lag covariance has no preferred base offset") {
    auto g = grid1d(64);
    auto cov = CovarianceModel::exponential(1.0, 2.0);
    auto diff = replicate_stat(300, 55, [&](std::uint64_t s) {
        auto A = sample_gaussian(g, cov, s);
        KahanSum even, odd;
        for (int i = 0; i < g.N; i += 2) {
            even.add(A.values[i] * A.values[(i + 3) % g.N]);
            odd.add(A.values[i + 1] * A.values[(i + 4) % g.N]);
        }
        return (even.value() - odd.value()) / (g.N / 2);
    });
    CHECK(std::abs(diff.mean) <= 3.0 * diff.se);
}

TEST_CASE("binary field dump round-trips and has the documented header") {
    auto g = grid1d(16, 0.25);
    auto A = sample_gaussian(g, CovarianceModel::delta_lag(1.0), 77);
    auto path = std::filesystem::temp_directory_path() / "msfi_field_test.bin";
    write_field(A, path.string());

    std::ifstream in(path, std::ios::binary);
    std::vector<unsigned char> header(16);
    in.read(reinterpret_cast<char*>(header.data()), 16);
    CHECK(header[0] == 'M');
    CHECK(header[1] == 'S');
    CHECK(header[2] == 'F');
    CHECK(header[3] == 'I');
    CHECK(header[4] == 1);    // version, little-endian u32
    CHECK(header[8] == 1);    // d
    CHECK(header[12] == 16);  // N
    in.close();

    auto B = read_field(path.string(), g.h);
    CHECK(B.grid.d == A.grid.d);
    CHECK(B.grid.N == A.grid.N);
    CHECK(B.values == A.values);
    std::filesystem::remove(path);
}

TEST_CASE("long-range synthesis hits the minimal-image variance target") {
    auto g = grid1d(256);
    auto cov = CovarianceModel::algebraic_decay(1.0, 0.5);
    double target = wrapped_covariance(cov, g, {0, 0, 0});
    CHECK(target == doctest::Approx(1.0));
    auto stat = replicate_stat(300, 61, [&](std::uint64_t s) {
        auto A = sample_gaussian(g, cov, s);
        return lag_product_avg(A, 0);
    });
    CHECK(std::abs(stat.mean - target) <= 3.0 * stat.se);
}
