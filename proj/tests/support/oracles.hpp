#pragma once

// Reference computations used as independent oracles in tests. Deliberately
// naive and separate from the library paths they check.

#include "msfi/fieldgen.hpp"
#include "msfi/functionals.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace msfi::testsupport {

// Composite Simpson with interval doubling until two refinements agree.
inline double simpson_oracle(const std::function<double(double)>& f, double a, double b,
                             double rel_tol = 1e-10, int max_doublings = 22) {
    auto pass = [&](int n) {
        double h = (b - a) / n;
        double s = f(a) + f(b);
        for (int i = 1; i < n; i += 2) s += 4.0 * f(a + i * h);
        for (int i = 2; i < n; i += 2) s += 2.0 * f(a + i * h);
        return s * h / 3.0;
    };
    int n = 64;
    double prev = pass(n);
    for (int k = 0; k < max_doublings; ++k) {
        n *= 2;
        double cur = pass(n);
        if (std::abs(cur - prev) <= rel_tol * std::max(1e-300, std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

// Integral over [a, inf) by the same substitution the library documents,
// but through the Simpson oracle.
inline double simpson_oracle_to_inf(const std::function<double(double)>& f, double a,
                                    double rel_tol = 1e-10) {
    double upper = 1.0 / (1.0 + a);
    auto g = [&](double t) {
        if (t <= 0.0) return 0.0;
        double s = (1.0 - t) / t;
        return f(s) / (t * t);
    };
    return simpson_oracle(g, 0.0, upper, rel_tol);
}

// Plain double-loop spatial average, the naive-summation oracle.
inline double naive_spatial_average(const fieldgen::FieldSample& F, double mean_F, double L,
                                    functionals::AverageKind kind) {
    const auto& grid = F.grid;
    std::int64_t total = grid.cells();
    if (kind == functionals::AverageKind::ExpKernel) {
        double sum = 0.0;
        for (std::int64_t i = 0; i < total; ++i) {
            double dist = grid.offset_distance(grid.decode(i));
            sum += std::exp(-dist / L) * (F.values[i] - mean_F);
        }
        return sum * std::pow(grid.h, grid.d) * std::pow(L, -grid.d);
    }
    double sum = 0.0;
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < total; ++i) {
        auto c = grid.decode(i);
        bool inside = true;
        for (int axis = 0; axis < grid.d; ++axis) {
            double x = grid.min_image(c[axis]) * grid.h;
            if (!(x >= -0.5 * L && x < 0.5 * L)) {
                inside = false;
                break;
            }
        }
        if (inside) {
            sum += F.values[i] - mean_F;
            ++count;
        }
    }
    if (count == 0) throw std::runtime_error("naive_spatial_average: empty box");
    return sum / static_cast<double>(count);
}

// Wrapped covariance by direct image summation with a generous fixed cap,
// independent of the fieldgen truncation rule.
inline double direct_wrapped_covariance(const fieldgen::CovarianceModel& cov,
                                        const fieldgen::GridSpec& grid,
                                        const std::array<int, 3>& offset, int wraps = 50) {
    if (cov.kind == fieldgen::CovKind::DeltaLag) {
        for (int axis = 0; axis < grid.d; ++axis) {
            if (grid.min_image(offset[axis]) != 0) return 0.0;
        }
        return cov.sigma2;
    }
    if (cov.kind == fieldgen::CovKind::AlgebraicDecay) wraps = 0;  // minimal-image definition
    double side = grid.side();
    double total = 0.0;
    std::array<int, 3> k{0, 0, 0};
    for (k[0] = (grid.d > 0 ? -wraps : 0); k[0] <= (grid.d > 0 ? wraps : 0); ++k[0]) {
        for (k[1] = (grid.d > 1 ? -wraps : 0); k[1] <= (grid.d > 1 ? wraps : 0); ++k[1]) {
            for (k[2] = (grid.d > 2 ? -wraps : 0); k[2] <= (grid.d > 2 ? wraps : 0); ++k[2]) {
                double s = 0.0;
                for (int axis = 0; axis < grid.d; ++axis) {
                    double x = grid.min_image(offset[axis]) * grid.h + k[axis] * side;
                    s += x * x;
                }
                total += cov.eval(std::sqrt(s));
            }
        }
    }
    return total;
}

// Exact Var[X_L] for a Gaussian model under the Box average with CellValue:
// the deterministic covariance double sum over the box cells.
inline double box_variance_double_sum(const fieldgen::CovarianceModel& cov,
                                      const fieldgen::GridSpec& grid, double L) {
    std::vector<int> cells;
    for (int j = -grid.N / 2 + 1; j <= grid.N / 2; ++j) {
        double x = j * grid.h;
        if (x >= -0.5 * L && x < 0.5 * L) cells.push_back(j);
    }
    if (grid.d != 1) throw std::runtime_error("box_variance_double_sum: d = 1 only");
    double total = 0.0;
    for (int a : cells) {
        for (int b : cells) {
            total += direct_wrapped_covariance(cov, grid, {a - b, 0, 0});
        }
    }
    double m = static_cast<double>(cells.size());
    return total / (m * m);
}

// Gaussian upper tail P[Z > x] for Z ~ N(0, 1).
inline double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace msfi::testsupport
