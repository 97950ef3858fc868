#include "msfi/weights.hpp"

#include "msfi/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace msfi::weights {

WeightFamily WeightFamily::algebraic(double beta, double normalization) {
    WeightFamily w{WeightKind::Algebraic, beta, 0.0, 0.0, normalization};
    w.validate();
    return w;
}

WeightFamily WeightFamily::stretched_exp(double beta, double c, double normalization) {
    WeightFamily w{WeightKind::StretchedExp, beta, c, 0.0, normalization};
    w.validate();
    return w;
}

WeightFamily WeightFamily::compact(double R, double normalization) {
    WeightFamily w{WeightKind::Compact, 0.0, 0.0, R, normalization};
    w.validate();
    return w;
}

void WeightFamily::validate() const {
    if (!(normalization > 0.0)) {
        throw std::invalid_argument("WeightFamily: normalization must be positive");
    }
    switch (kind) {
        case WeightKind::Algebraic:
            if (!(beta > 0.0)) throw std::invalid_argument("WeightFamily: beta must be positive");
            break;
        case WeightKind::StretchedExp:
            if (!(beta > 0.0)) throw std::invalid_argument("WeightFamily: beta must be positive");
            if (!(c > 0.0)) throw std::invalid_argument("WeightFamily: c must be positive");
            break;
        case WeightKind::Compact:
            if (!(R > 0.0)) throw std::invalid_argument("WeightFamily: R must be positive");
            break;
    }
}

std::string WeightFamily::label() const {
    std::ostringstream out;
    switch (kind) {
        case WeightKind::Algebraic:
            out << "algebraic(beta=" << beta << ")";
            break;
        case WeightKind::StretchedExp:
            out << "stretched_exp(beta=" << beta << ",c=" << c << ")";
            break;
        case WeightKind::Compact:
            out << "compact(R=" << R << ")";
            break;
    }
    if (normalization != 1.0) out << "*" << normalization;
    return out.str();
}

DimensionContext::DimensionContext(int d_) : d(d_) {
    switch (d) {
        case 1:
            ball_volume_unit = 2.0;
            break;
        case 2:
            ball_volume_unit = std::numbers::pi;
            break;
        case 3:
            ball_volume_unit = 4.0 * std::numbers::pi / 3.0;
            break;
        default:
            throw std::invalid_argument("DimensionContext: d must be 1, 2 or 3");
    }
}

double eval_weight(const WeightFamily& w, double ell) {
    w.validate();
    if (ell < 0.0) throw std::invalid_argument("eval_weight: ell must be nonnegative");
    switch (w.kind) {
        case WeightKind::Algebraic:
            return w.normalization * std::pow(ell + 1.0, -1.0 - w.beta);
        case WeightKind::StretchedExp:
            return w.normalization * std::exp(-std::pow(ell, w.beta) / w.c);
        case WeightKind::Compact:
            return ell <= w.R ? w.normalization : 0.0;
    }
    return 0.0;
}

double tail_integral(const WeightFamily& w, double r) {
    w.validate();
    if (r < 0.0) throw std::invalid_argument("tail_integral: r must be nonnegative");
    switch (w.kind) {
        case WeightKind::Algebraic:
            return w.normalization * std::pow(r + 1.0, -w.beta) / w.beta;
        case WeightKind::StretchedExp:
            if (w.beta == 1.0) {
                return w.normalization * w.c * std::exp(-r / w.c);
            }
            if (w.beta == 2.0) {
                double s = std::sqrt(w.c);
                return w.normalization * 0.5 * std::sqrt(std::numbers::pi) * s *
                       std::erfc(r / s);
            }
            return tail_integral_quadrature(w, r);
        case WeightKind::Compact:
            return w.normalization * std::max(w.R - r, 0.0);
    }
    return 0.0;
}

double tail_integral_quadrature(const WeightFamily& w, double r) {
    w.validate();
    if (r < 0.0) throw std::invalid_argument("tail_integral: r must be nonnegative");
    if (w.kind == WeightKind::Compact) {
        // The indicator has a jump; integrate the finite support directly.
        if (r >= w.R) return 0.0;
        return integrate([&w](double s) { return eval_weight(w, s); }, r, w.R);
    }
    return integrate_upper_inf([&w](double s) { return eval_weight(w, s); }, r);
}

double pi_star(const WeightFamily& w, const DimensionContext& ctx, double ell) {
    w.validate();
    if (ell < 0.0) throw std::invalid_argument("pi_star: ell must be nonnegative");
    if (ell == 0.0) return 1.0 / tail_integral(w, 0.0);
    // Radial reduction: the ball average of tail_integral(|x|) equals
    // (d / ell^d) * int_0^ell r^(d-1) tail_integral(r) dr.
    double d = static_cast<double>(ctx.d);
    double inner = integrate(
        [&](double r) { return std::pow(r, d - 1.0) * tail_integral(w, r); }, 0.0, ell,
        1e-6);
    double avg = d * inner / std::pow(ell, d);
    return 1.0 / avg;
}

double pi_star_asymptotic(double beta, const DimensionContext& ctx, double ell) {
    if (!(beta > 0.0)) throw std::invalid_argument("pi_star_asymptotic: beta must be positive");
    if (ell < 0.0) throw std::invalid_argument("pi_star_asymptotic: ell must be nonnegative");
    double d = static_cast<double>(ctx.d);
    if (beta < d) return std::pow(ell + 1.0, beta);
    if (beta == d) return std::pow(ell + 1.0, d) / std::log(2.0 + ell);
    return std::pow(ell + 1.0, d);
}

}  // namespace msfi::weights
