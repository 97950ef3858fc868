#pragma once

#include "msfi/grid.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace msfi::fieldgen {

struct SynthesisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Isotropic covariance C(x) = C(|x|) of a centered stationary field.
/// All kinds are nonnegative and nonincreasing in |x|:
///   DeltaLag(sigma2):            sigma2 at lag 0, zero at any other cell
///   Exponential(sigma2, rho):    sigma2 * exp(-|x|/rho)
///   AlgebraicDecay(sigma2, gamma): sigma2 * (1+|x|)^(-gamma)
enum class CovKind { DeltaLag, Exponential, AlgebraicDecay };

struct CovarianceModel {
    CovKind kind = CovKind::DeltaLag;
    double sigma2 = 1.0;
    double rho = 1.0;
    double gamma = 1.0;

    static CovarianceModel delta_lag(double sigma2);
    static CovarianceModel exponential(double sigma2, double rho);
    static CovarianceModel algebraic_decay(double sigma2, double gamma);

    void validate() const;
    /// Continuum covariance at physical distance r >= 0 (DeltaLag: value at
    /// r = 0 only, handled separately on the lattice).
    double eval(double r) const;
    std::string label() const;
};

/// Radius law of the Poisson inclusion (Boolean) model.
struct RadiusLaw {
    enum class Kind { Fixed, ParetoTail };
    Kind kind = Kind::Fixed;
    double r = 1.0;   // Fixed
    double r0 = 1.0;  // ParetoTail scale
    double a = 2.0;   // ParetoTail exponent; requires a > d

    static RadiusLaw fixed(double r);
    static RadiusLaw pareto_tail(double r0, double a);
    std::string label() const;
};

/// Cell law of the block-i.i.d. model.
struct BlockLaw {
    enum class Kind { Bernoulli, UniformPM1 };
    Kind kind = Kind::Bernoulli;
    double p = 0.5;  // Bernoulli

    static BlockLaw bernoulli(double p);
    static BlockLaw uniform_pm1();  // uniform on [-1, 1]

    double mean() const;
    double variance() const;
    std::string label() const;
};

/// A complete field model: grid plus one of the three generator classes.
struct FieldModel {
    enum class Kind { Gaussian, Boolean, BlockIID };

    Kind kind = Kind::Gaussian;
    GridSpec grid;
    CovarianceModel cov;       // Gaussian
    double intensity = 0.0;    // Boolean
    RadiusLaw radius;          // Boolean
    int block = 1;             // BlockIID
    BlockLaw law;              // BlockIID

    static FieldModel gaussian(const GridSpec& grid, const CovarianceModel& cov);
    static FieldModel boolean(const GridSpec& grid, double intensity, const RadiusLaw& radius);
    static FieldModel block_iid(const GridSpec& grid, int block, const BlockLaw& law);

    void validate() const;
    std::string label() const;

    /// E[A(0)] when the model provides it in closed form (Gaussian: 0;
    /// block law mean; Boolean coverage probability where the torus ball
    /// volume is available exactly). Empty means callers must pool.
    std::optional<double> analytic_mean() const;
};

/// Torus covariance targeted by the Gaussian synthesis. Exponential models
/// sum the continuum covariance over periodic images, truncated once the
/// remaining shells fall below ~1e-13 * sigma2. Algebraic tails converge far
/// too slowly for that rule (and diverge for gamma <= d), so their torus
/// model is defined by the minimal image alone.
double wrapped_covariance(const CovarianceModel& cov, const GridSpec& grid,
                          const std::array<int, 3>& offset);

std::vector<double> wrapped_covariance_array(const CovarianceModel& cov, const GridSpec& grid);

/// Spectral coefficients s(k) = DFT(wrapped covariance)(k) / N^d, clipped at
/// zero. A coefficient below -1e-10 * sigma2 raises SynthesisError naming
/// the offending mode.
std::vector<double> spectral_coefficients(const CovarianceModel& cov, const GridSpec& grid);

/// Centered stationary Gaussian field whose torus covariance equals the
/// wrapped covariance exactly (circulant embedding).
FieldSample sample_gaussian(const GridSpec& grid, const CovarianceModel& cov,
                            std::uint64_t seed);

/// Indicator of a Poisson process of balls on the torus: count first, then
/// per-point center and radius, each point on its own counter stream so that
/// intensities are coupled monotonically under a shared seed.
FieldSample sample_boolean(const GridSpec& grid, double intensity, const RadiusLaw& radius,
                           std::uint64_t seed);

/// Field constant on aligned cubes of side block*h, one i.i.d. draw per
/// cube. block must divide N.
FieldSample sample_block_iid(const GridSpec& grid, int block, const BlockLaw& law,
                             std::uint64_t seed);

FieldSample sample_field(const FieldModel& model, std::uint64_t seed);

/// True if the model supports exterior conditional resampling (block-i.i.d.,
/// Boolean, and white-noise Gaussian models do; correlated Gaussian models
/// do not).
bool supports_exterior_resampling(const FieldModel& model);

/// Redraws the field at distance >= ell from the origin while keeping the
/// interior realization, consistently with the model law. For block fields
/// every block touching the exterior is redrawn; for Boolean models the
/// points with centers at distance >= ell are replaced by a fresh Poisson
/// process on that region. Throws std::runtime_error for unsupported models.
FieldSample resample_exterior(const FieldModel& model, const FieldSample& sample, double ell,
                              std::uint64_t resample_seed);

}  // namespace msfi::fieldgen
