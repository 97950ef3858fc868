#pragma once

#include <string>

namespace msfi::weights {

enum class WeightKind { Algebraic, StretchedExp, Compact };

/// Scale weight pi(l), l >= 0, in one of three parametric families:
///
///   Algebraic(beta):       normalization * (l+1)^(-1-beta)
///   StretchedExp(beta, c): normalization * exp(-l^beta / c)
///   Compact(R):            normalization * 1[l <= R]
///
/// Each family is nonnegative, nonincreasing and integrable; those are the
/// standing assumptions behind every bound evaluated downstream. The
/// normalization prefactor is kept explicit because weights are only defined
/// up to rescaling; bound curves fit their own constant.
struct WeightFamily {
    WeightKind kind = WeightKind::Algebraic;
    double beta = 0.0;
    double c = 0.0;
    double R = 0.0;
    double normalization = 1.0;

    static WeightFamily algebraic(double beta, double normalization = 1.0);
    static WeightFamily stretched_exp(double beta, double c, double normalization = 1.0);
    static WeightFamily compact(double R, double normalization = 1.0);

    /// Throws std::invalid_argument on nonpositive parameters.
    void validate() const;

    std::string label() const;
};

/// Ambient dimension d in {1, 2, 3} together with the unit-ball volume.
struct DimensionContext {
    int d;
    double ball_volume_unit;

    explicit DimensionContext(int d_);
};

/// pi(l). Rejects negative l.
double eval_weight(const WeightFamily& w, double ell);

/// Integral of pi over [r, inf): closed form where the family admits one,
/// adaptive quadrature otherwise. Relative accuracy 1e-8.
double tail_integral(const WeightFamily& w, double r);

/// The same tail integral, always computed by quadrature. This is the second
/// route behind the closed-form/quadrature agreement check.
double tail_integral_quadrature(const WeightFamily& w, double r);

/// pi_*(l) = ( mean over the ball B_l of tail_integral(|x|) )^(-1), reduced
/// to the radial integral (d / l^d) * int_0^l r^(d-1) tail_integral(r) dr.
/// The l = 0 value is the degenerate-ball limit 1 / tail_integral(0).
/// Relative accuracy 1e-6.
double pi_star(const WeightFamily& w, const DimensionContext& ctx, double ell);

/// Asymptotic equivalent of pi_* when pi(l) is comparable to (l+1)^(-1-beta):
/// (l+1)^beta for beta < d, (l+1)^d / log(2+l) for beta = d, (l+1)^d for
/// beta > d.
double pi_star_asymptotic(double beta, const DimensionContext& ctx, double ell);

}  // namespace msfi::weights
