#pragma once

#include "msfi/estimate.hpp"
#include "msfi/fieldgen.hpp"
#include "msfi/functionals.hpp"

#include <limits>
#include <vector>

namespace msfi::estimators {

/// Threshold events on box averages: G = { average of A over the region >=
/// level }. A finite family like this bounds the mixing sup from below, so
/// confrontations test "estimated alpha <= predicted bound", a one-sided
/// check.
struct EventFamily {
    std::vector<double> levels;
    double region_size = 1.0;  // physical side of the cubic regions

    void validate() const;
};

struct MixingQuery {
    double R = 1.0;
    double D = std::numeric_limits<double>::infinity();
    EventFamily family;
    /// Cell offset of the first region along axis 0; lets callers straddle
    /// block boundaries deliberately.
    std::int64_t region_offset_cells = 0;

    void validate(const fieldgen::GridSpec& grid) const;
};

/// Number of worker threads used for replicate batches. Reads MSFI_THREADS,
/// defaulting to the hardware concurrency. Affects wall time only: replicate
/// results are written into per-replicate slots and reduced in index order
/// with compensated summation, so any thread count reproduces the serial
/// bytes.
int thread_count();

/// Empirical covariance Cov[A(0), A(lag)]: per replicate the average of
/// A(x) A(x+lag) over the torus minus the squared mean (analytic when the
/// model provides one, pooled and flagged otherwise), aggregated across
/// replicates. The lag is canonicalized by sign so that +lag and -lag
/// produce identical bits.
Estimate empirical_covariance(const fieldgen::FieldModel& model, const std::vector<double>& lag,
                              std::int64_t replicates, std::uint64_t seed);

/// Sample variance of X_L across replicates (fresh field, transform, spatial
/// average per replicate). std_error is the delta-method error of the
/// variance statistic.
Estimate variance_of_average(const fieldgen::FieldModel& model,
                             const functionals::LocalFunctional& f,
                             functionals::AverageKind kind, double L, std::int64_t replicates,
                             std::uint64_t seed);

/// P[X_L >= delta] with the binomial standard error sqrt(p(1-p)/n).
Estimate tail_probability(const fieldgen::FieldModel& model,
                          const functionals::LocalFunctional& f, functionals::AverageKind kind,
                          double L, double delta, std::int64_t replicates, std::uint64_t seed);

/// E[X_L^(2p)] for p in [1, 6].
Estimate moment_of_average(const fieldgen::FieldModel& model,
                           const functionals::LocalFunctional& f, functionals::AverageKind kind,
                           double L, int p, std::int64_t replicates, std::uint64_t seed);

/// Lower-bound estimator of the alpha-mixing coefficient: two cubic regions
/// at torus distance >= R, the declared threshold-event family on their box
/// averages, and the maximum over event pairs of |P[G1 & G2] - P[G1] P[G2]|.
/// The standard error reported is that of the maximizing pair alone (no
/// multiplicity correction), which is optimistic.
Estimate mixing_coefficient(const fieldgen::FieldModel& model, const MixingQuery& query,
                            std::int64_t replicates, std::uint64_t seed);

/// Ball average of the transformed field over B_R around the origin.
double ergodic_average(const fieldgen::FieldSample& sample,
                       const functionals::LocalFunctional& f, double R);

}  // namespace msfi::estimators
