#include "msfi/functionals.hpp"

#include "msfi/common.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace msfi::functionals {

LocalFunctional LocalFunctional::cell_value() { return LocalFunctional{}; }

LocalFunctional LocalFunctional::ball_average(double radius) {
    LocalFunctional f;
    f.kind = Kind::BallAverage;
    f.radius = radius;
    f.validate();
    return f;
}

LocalFunctional LocalFunctional::threshold(double radius, double level) {
    LocalFunctional f;
    f.kind = Kind::Threshold;
    f.radius = radius;
    f.level = level;
    f.validate();
    return f;
}

void LocalFunctional::validate() const {
    if (kind != Kind::CellValue && !(radius > 0.0)) {
        throw std::invalid_argument("LocalFunctional: radius must be positive");
    }
}

std::string LocalFunctional::label() const {
    std::ostringstream out;
    switch (kind) {
        case Kind::CellValue:
            out << "cell_value";
            break;
        case Kind::BallAverage:
            out << "ball_average(r=" << radius << ")";
            break;
        case Kind::Threshold:
            out << "threshold(r=" << radius << ",level=" << level << ")";
            break;
    }
    return out.str();
}

std::string average_kind_label(AverageKind kind) {
    return kind == AverageKind::ExpKernel ? "exp" : "box";
}

namespace {

// Lattice offsets within the physical ball of radius r.
std::vector<std::array<int, 3>> ball_stencil(const fieldgen::GridSpec& grid, double r) {
    if (r > grid.half_side()) {
        throw std::invalid_argument("ball radius exceeds the torus half-side");
    }
    int reach = static_cast<int>(std::floor(r / grid.h + 1e-12));
    std::array<int, 3> m{0, 0, 0};
    int lo = -reach, hi = reach;
    std::vector<std::array<int, 3>> offsets;
    for (m[0] = (grid.d > 0 ? lo : 0); m[0] <= (grid.d > 0 ? hi : 0); ++m[0]) {
        for (m[1] = (grid.d > 1 ? lo : 0); m[1] <= (grid.d > 1 ? hi : 0); ++m[1]) {
            for (m[2] = (grid.d > 2 ? lo : 0); m[2] <= (grid.d > 2 ? hi : 0); ++m[2]) {
                double s = 0.0;
                for (int axis = 0; axis < grid.d; ++axis) {
                    s += double(m[axis]) * m[axis];
                }
                if (std::sqrt(s) * grid.h <= r + 1e-12) offsets.push_back(m);
            }
        }
    }
    return offsets;
}

double ball_average_at(const fieldgen::FieldSample& A,
                       const std::vector<std::array<int, 3>>& offsets,
                       const std::array<int, 3>& at) {
    const auto& grid = A.grid;
    KahanSum sum;
    for (const auto& off : offsets) {
        std::array<int, 3> c = at;
        for (int axis = 0; axis < grid.d; ++axis) c[axis] += off[axis];
        sum.add(A.values[grid.encode(c)]);
    }
    return sum.value() / static_cast<double>(offsets.size());
}

}  // namespace

fieldgen::FieldSample transform_field(const LocalFunctional& f, const fieldgen::FieldSample& A) {
    f.validate();
    A.grid.validate();
    if (f.kind == LocalFunctional::Kind::CellValue) {
        return A;
    }
    auto offsets = ball_stencil(A.grid, f.radius);
    fieldgen::FieldSample out = A;
    std::int64_t total = A.grid.cells();
    for (std::int64_t i = 0; i < total; ++i) {
        double avg = ball_average_at(A, offsets, A.grid.decode(i));
        out.values[i] =
            f.kind == LocalFunctional::Kind::BallAverage ? avg : (avg >= f.level ? 1.0 : 0.0);
    }
    out.model_tag = A.model_tag + "|" + f.label();
    return out;
}

double functional_at_origin(const LocalFunctional& f, const fieldgen::FieldSample& A) {
    f.validate();
    if (f.kind == LocalFunctional::Kind::CellValue) return A.values[0];
    auto offsets = ball_stencil(A.grid, f.radius);
    double avg = ball_average_at(A, offsets, {0, 0, 0});
    return f.kind == LocalFunctional::Kind::BallAverage ? avg : (avg >= f.level ? 1.0 : 0.0);
}

double kernel_mass(const fieldgen::GridSpec& grid, double L, AverageKind kind) {
    if (!(L > 0.0)) throw std::invalid_argument("kernel_mass: L must be positive");
    if (kind == AverageKind::Box) return 1.0;
    std::int64_t total = grid.cells();
    KahanSum sum;
    for (std::int64_t i = 0; i < total; ++i) {
        sum.add(std::exp(-grid.offset_distance(grid.decode(i)) / L));
    }
    return sum.value() * std::pow(grid.h, grid.d) * std::pow(L, -grid.d);
}

SpatialAverage spatial_average(const fieldgen::FieldSample& F, double mean_F, double L,
                               AverageKind kind) {
    if (!(L > 0.0)) throw std::invalid_argument("spatial_average: L must be positive");
    const auto& grid = F.grid;
    grid.validate();
    SpatialAverage out;
    out.truncated = L > grid.half_side();
    std::int64_t total = grid.cells();
    if (kind == AverageKind::ExpKernel) {
        KahanSum sum;
        for (std::int64_t i = 0; i < total; ++i) {
            double w = std::exp(-grid.offset_distance(grid.decode(i)) / L);
            sum.add(w * (F.values[i] - mean_F));
        }
        out.value = sum.value() * std::pow(grid.h, grid.d) * std::pow(L, -grid.d);
        return out;
    }
    // Box: cells whose minimal-image coordinates fall in [-L/2, L/2) per axis.
    std::vector<int> axis_cells;
    for (int j = -grid.N / 2 + 1; j <= grid.N / 2; ++j) {
        double x = j * grid.h;
        if (x >= -0.5 * L && x < 0.5 * L) {
            axis_cells.push_back(((j % grid.N) + grid.N) % grid.N);
        }
    }
    if (axis_cells.empty()) {
        throw std::invalid_argument("spatial_average: box contains no cells (L too small)");
    }
    std::sort(axis_cells.begin(), axis_cells.end());
    KahanSum sum;
    std::int64_t count = 0;
    std::array<std::size_t, 3> it{0, 0, 0};
    std::array<std::size_t, 3> limit{1, 1, 1};
    for (int axis = 0; axis < grid.d; ++axis) limit[axis] = axis_cells.size();
    for (it[0] = 0; it[0] < limit[0]; ++it[0]) {
        for (it[1] = 0; it[1] < limit[1]; ++it[1]) {
            for (it[2] = 0; it[2] < limit[2]; ++it[2]) {
                std::array<int, 3> c{0, 0, 0};
                for (int axis = 0; axis < grid.d; ++axis) c[axis] = axis_cells[it[axis]];
                sum.add(F.values[grid.encode(c)] - mean_F);
                ++count;
            }
        }
    }
    out.value = sum.value() / static_cast<double>(count);
    return out;
}

Estimate locality_defect(const LocalFunctional& f, const fieldgen::FieldModel& model,
                         double ell, std::int64_t replicates, std::uint64_t seed) {
    f.validate();
    model.validate();
    if (replicates < 2) throw std::invalid_argument("locality_defect: replicates must be >= 2");
    if (ell < 0.0) throw std::invalid_argument("locality_defect: ell must be nonnegative");
    if (!fieldgen::supports_exterior_resampling(model)) {
        throw std::runtime_error("locality_defect: unsupported model " + model.label() +
                                 " (no conditional resampling)");
    }
    double worst = 0.0;
    for (std::int64_t r = 0; r < replicates; ++r) {
        std::uint64_t draw_seed = replicate_seed(seed, 2 * static_cast<std::uint64_t>(r));
        std::uint64_t redraw_seed = replicate_seed(seed, 2 * static_cast<std::uint64_t>(r) + 1);
        auto A = fieldgen::sample_field(model, draw_seed);
        auto B = fieldgen::resample_exterior(model, A, ell, redraw_seed);
        double defect = std::abs(functional_at_origin(f, A) - functional_at_origin(f, B));
        worst = std::max(worst, defect);
    }
    Estimate est;
    est.value = worst;
    est.std_error = 0.0;
    est.n = replicates;
    est.seed = seed;
    est.flags.insert("max-statistic");
    return est;
}

double derivative_profile(double ell, double x_norm, double L,
                          const weights::DimensionContext& ctx, double C_loc) {
    if (ell < 0.0 || x_norm < 0.0 || !(L > 0.0) || !(C_loc > 0.0)) {
        throw std::invalid_argument("derivative_profile: arguments out of range");
    }
    double d = static_cast<double>(ctx.d);
    double core = std::pow(std::min(L, ell + 1.0) / L, d);
    return core * std::exp(-x_norm / (C_loc * (L + ell + 1.0)));
}

}  // namespace msfi::functionals
