#pragma once

#include "msfi/estimate.hpp"
#include "msfi/fieldgen.hpp"
#include "msfi/weights.hpp"

#include <optional>
#include <string>

namespace msfi::functionals {

/// 1-local map f(A) evaluated around each grid point:
///   CellValue:            f(A) = A(0)
///   BallAverage(r):       f(A) = mean of A over the ball of radius r
///   Threshold(r, level):  f(A) = 1[ball average >= level]
/// With r <= 1 all kinds are exactly 1-local. Threshold is bounded by 1
/// regardless of the field.
struct LocalFunctional {
    enum class Kind { CellValue, BallAverage, Threshold };

    Kind kind = Kind::CellValue;
    double radius = 1.0;
    double level = 0.0;

    static LocalFunctional cell_value();
    static LocalFunctional ball_average(double radius);
    static LocalFunctional threshold(double radius, double level);

    void validate() const;
    double locality_radius() const { return kind == Kind::CellValue ? 0.0 : radius; }
    std::optional<double> bound() const {
        return kind == Kind::Threshold ? std::optional<double>(1.0) : std::nullopt;
    }
    std::string label() const;
};

enum class AverageKind { ExpKernel, Box };

std::string average_kind_label(AverageKind kind);

/// F(x) = f(A(. + x)) on the same grid. Ball averages are discrete
/// convolutions with the normalized (wrapped) ball indicator.
fieldgen::FieldSample transform_field(const LocalFunctional& f, const fieldgen::FieldSample& A);

/// F(0) alone; what locality probes compare before and after resampling.
double functional_at_origin(const LocalFunctional& f, const fieldgen::FieldSample& A);

struct SpatialAverage {
    double value = 0.0;
    /// Set when L exceeds the torus half-side, where the kernel (or box) is
    /// materially truncated by the torus itself.
    bool truncated = false;
};

/// Spatial average of the centered field at scale L:
///   ExpKernel: h^d L^-d sum_y exp(-|y|/L) (F(y) - mean_F), |y| the torus
///              distance to the origin cell;
///   Box:       plain average of F - mean_F over the cells of Q_L =
///              [-L/2, L/2)^d centered at the origin.
/// mean_F is an explicit input: pass the analytic mean when the model has
/// one, or a pooled estimate (and record that fact upstream).
SpatialAverage spatial_average(const fieldgen::FieldSample& F, double mean_F, double L,
                               AverageKind kind);

/// Total kernel mass against which mean_F is centered: X_L(F, m) equals
/// raw(F) - m * kernel_mass. Box averages have mass exactly 1.
double kernel_mass(const fieldgen::GridSpec& grid, double L, AverageKind kind);

/// Monte Carlo locality probe: draw A, redraw everything at distance >= ell
/// from the origin (consistently with the model law), and report the largest
/// observed |f(A) - f(A_resampled)|. Zero exactly when f cannot see past
/// B_ell. The returned Estimate carries the max, not a mean; std_error is 0
/// and the "max-statistic" flag is set. Models without a conditional
/// resampling (correlated Gaussian) throw.
Estimate locality_defect(const LocalFunctional& f, const fieldgen::FieldModel& model,
                         double ell, std::int64_t replicates, std::uint64_t seed);

/// Closed-form envelope of the local derivative of X_L with respect to a
/// perturbation in the ball of scale ell centered at distance x_norm:
///   L^-d * min(L, ell+1)^d * exp(-x_norm / (C_loc * (L + ell + 1))).
double derivative_profile(double ell, double x_norm, double L,
                          const weights::DimensionContext& ctx, double C_loc);

}  // namespace msfi::functionals
