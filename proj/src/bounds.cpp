#include "msfi/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace msfi::bounds {

namespace {

double require_param(const BoundRegime& regime, const std::string& name) {
    auto it = regime.params.find(name);
    if (it == regime.params.end()) {
        throw std::invalid_argument("bound regime " + regime_name(regime.kind) +
                                    " requires parameter " + name);
    }
    return it->second;
}

double point_param(const FitPoint& pt, const std::string& name) {
    auto it = pt.params.find(name);
    if (it == pt.params.end()) {
        throw std::invalid_argument("fit point " + pt.id + " misses parameter " + name);
    }
    return it->second;
}

}  // namespace

Regime regime_from_string(const std::string& name) {
    if (name == "VarMSG") return Regime::VarMSG;
    if (name == "TailMSGfct") return Regime::TailMSGfct;
    if (name == "TailMLSIfct") return Regime::TailMLSIfct;
    if (name == "TailOscAlg") return Regime::TailOscAlg;
    if (name == "TailOscExpSG") return Regime::TailOscExpSG;
    if (name == "TailOscExpLSI") return Regime::TailOscExpLSI;
    if (name == "TailMixing") return Regime::TailMixing;
    if (name == "CovDecay") return Regime::CovDecay;
    if (name == "MixingDecay") return Regime::MixingDecay;
    if (name == "PsiL") return Regime::PsiL;
    if (name == "PsiP0Alpha") return Regime::PsiP0Alpha;
    if (name == "MomentSG") return Regime::MomentSG;
    if (name == "MomentLSI") return Regime::MomentLSI;
    throw std::invalid_argument("unknown bound regime: " + name);
}

std::string regime_name(Regime kind) {
    switch (kind) {
        case Regime::VarMSG: return "VarMSG";
        case Regime::TailMSGfct: return "TailMSGfct";
        case Regime::TailMLSIfct: return "TailMLSIfct";
        case Regime::TailOscAlg: return "TailOscAlg";
        case Regime::TailOscExpSG: return "TailOscExpSG";
        case Regime::TailOscExpLSI: return "TailOscExpLSI";
        case Regime::TailMixing: return "TailMixing";
        case Regime::CovDecay: return "CovDecay";
        case Regime::MixingDecay: return "MixingDecay";
        case Regime::PsiL: return "PsiL";
        case Regime::PsiP0Alpha: return "PsiP0Alpha";
        case Regime::MomentSG: return "MomentSG";
        case Regime::MomentLSI: return "MomentLSI";
    }
    return "?";
}

double predicted_variance(const weights::WeightFamily& w, const weights::DimensionContext& ctx,
                          double L) {
    if (L < 0.0) throw std::invalid_argument("predicted_variance: L must be nonnegative");
    return 1.0 / weights::pi_star(w, ctx, L);
}

namespace {

double tail_value(Regime kind, double C, double beta, double d, double pistar_L, double delta,
                  double L) {
    switch (kind) {
        case Regime::TailMSGfct:
            return std::exp(-(delta / C) * std::sqrt(pistar_L));
        case Regime::TailMLSIfct:
            return std::exp(-(delta * delta / C) * pistar_L);
        case Regime::TailOscAlg:
            return C * std::exp(-delta / C) *
                   (1.0 + std::pow(delta, -2.0 * beta / d) * std::abs(std::log(delta))) *
                   std::pow(L, -beta);
        case Regime::TailOscExpSG:
            return std::exp(-(std::min(delta, delta * delta) / C) *
                            std::pow(L, std::min(beta, d / 2.0)));
        case Regime::TailOscExpLSI:
            return std::exp(-(std::min(delta, delta * delta) / C) *
                            std::pow(L, std::min(beta, d)));
        case Regime::TailMixing: {
            double exponent = d * beta / (d + beta);
            return C * std::exp(-(1.0 / C) * delta * delta *
                                std::pow(std::abs(std::log(delta)) + 1.0, -exponent) *
                                std::pow(L, exponent));
        }
        default:
            throw std::invalid_argument("predicted_tail: " + regime_name(kind) +
                                        " is not a tail regime");
    }
}

bool tail_needs_pistar(Regime kind) {
    return kind == Regime::TailMSGfct || kind == Regime::TailMLSIfct;
}

bool tail_needs_beta(Regime kind) {
    return kind == Regime::TailOscAlg || kind == Regime::TailOscExpSG ||
           kind == Regime::TailOscExpLSI || kind == Regime::TailMixing;
}

bool tail_restricted_to_L_ge_1(Regime kind) {
    return kind == Regime::TailOscExpSG || kind == Regime::TailOscExpLSI ||
           kind == Regime::TailMixing;
}

}  // namespace

double predicted_tail(const BoundRegime& regime, double delta, double L,
                      const weights::WeightFamily& w, const weights::DimensionContext& ctx) {
    if (!(delta > 0.0)) throw std::invalid_argument("predicted_tail: delta must be positive");
    if (!(L > 0.0)) throw std::invalid_argument("predicted_tail: L must be positive");
    if (tail_restricted_to_L_ge_1(regime.kind) && L < 1.0) {
        throw std::invalid_argument("predicted_tail: " + regime_name(regime.kind) +
                                    " requires L >= 1");
    }
    double C = require_param(regime, "C");
    if (!(C > 0.0)) throw std::invalid_argument("predicted_tail: C must be positive");
    double beta = tail_needs_beta(regime.kind) ? require_param(regime, "beta") : 0.0;
    double pistar_L = tail_needs_pistar(regime.kind) ? weights::pi_star(w, ctx, L) : 0.0;
    return tail_value(regime.kind, C, beta, static_cast<double>(ctx.d), pistar_L, delta, L);
}

double predicted_covariance_decay(const weights::WeightFamily& w, double x_norm, double C) {
    if (x_norm < 0.0) throw std::invalid_argument("predicted_covariance_decay: x_norm < 0");
    if (!(C > 0.0)) throw std::invalid_argument("predicted_covariance_decay: C must be positive");
    return C * weights::tail_integral(w, std::max(0.5 * (x_norm - 2.0), 0.0));
}

double predicted_mixing(const weights::WeightFamily& w, const weights::DimensionContext& ctx,
                        double R, double D, double C) {
    if (!(R > 0.0) || !(D > 0.0)) {
        throw std::invalid_argument("predicted_mixing: R and D must be positive");
    }
    if (!(C > 0.0)) throw std::invalid_argument("predicted_mixing: C must be positive");
    return C * std::pow(1.0 + D / R, static_cast<double>(ctx.d)) *
           weights::tail_integral(w, std::max(R - 1.0, 0.0));
}

double psi_l(double u, double L_param, double C) {
    if (u < 0.0) throw std::invalid_argument("psi_l: u must be nonnegative");
    if (!(L_param > 0.0) || !(C > 0.0)) {
        throw std::invalid_argument("psi_l: L_param and C must be positive");
    }
    return (u / L_param) * std::log1p(L_param * u / C);
}

double psi_p0_alpha(double u, double p0, double alpha) {
    if (u < 0.0) throw std::invalid_argument("psi_p0_alpha: u must be nonnegative");
    if (p0 < 0.0 || alpha < 0.0) {
        throw std::invalid_argument("psi_p0_alpha: p0 and alpha must be nonnegative");
    }
    return std::min(1.0, std::pow(u, 2.0 * p0)) * std::exp(std::pow(u, 2.0 / (2.0 + alpha)));
}

double moment_growth_shape(Regime kind, int p, double C, double base) {
    if (p < 1) throw std::invalid_argument("moment_growth_shape: p must be >= 1");
    if (!(C > 0.0) || !(base > 0.0)) {
        throw std::invalid_argument("moment_growth_shape: C and base must be positive");
    }
    double pd = static_cast<double>(p);
    switch (kind) {
        case Regime::MomentSG:
            return std::pow(C * pd * pd, pd) * std::pow(base, pd);
        case Regime::MomentLSI:
            return std::pow(C * pd, pd) * std::pow(base, pd);
        default:
            throw std::invalid_argument("moment_growth_shape: " + regime_name(kind) +
                                        " is not a moment shape");
    }
}

namespace {

// Curve value as a function of the fit constant, per regime.
std::function<double(double, const FitPoint&)> curve_for(
    const BoundRegime& regime, const weights::WeightFamily* w,
    const weights::DimensionContext* ctx) {
    Regime kind = regime.kind;
    switch (kind) {
        case Regime::VarMSG: {
            if (!w || !ctx) throw std::invalid_argument("VarMSG fit needs a weight and context");
            return [w, ctx](double C, const FitPoint& pt) {
                return C / weights::pi_star(*w, *ctx, point_param(pt, "L"));
            };
        }
        case Regime::TailMSGfct:
        case Regime::TailMLSIfct: {
            if (!w || !ctx) throw std::invalid_argument("tail fit needs a weight and context");
            return [kind, w, ctx](double C, const FitPoint& pt) {
                double pistar_L = weights::pi_star(*w, *ctx, point_param(pt, "L"));
                return tail_value(kind, C, 0.0, static_cast<double>(ctx->d), pistar_L,
                                  point_param(pt, "delta"), point_param(pt, "L"));
            };
        }
        case Regime::TailOscAlg:
        case Regime::TailOscExpSG:
        case Regime::TailOscExpLSI:
        case Regime::TailMixing: {
            double beta = require_param(regime, "beta");
            double d = require_param(regime, "d");
            return [kind, beta, d](double C, const FitPoint& pt) {
                return tail_value(kind, C, beta, d, 0.0, point_param(pt, "delta"),
                                  point_param(pt, "L"));
            };
        }
        case Regime::CovDecay: {
            if (!w) throw std::invalid_argument("CovDecay fit needs a weight");
            return [w](double C, const FitPoint& pt) {
                return predicted_covariance_decay(*w, point_param(pt, "x_norm"), C);
            };
        }
        case Regime::MixingDecay: {
            if (!w || !ctx) throw std::invalid_argument("MixingDecay fit needs a weight and context");
            return [w, ctx](double C, const FitPoint& pt) {
                return predicted_mixing(*w, *ctx, point_param(pt, "R"), point_param(pt, "D"), C);
            };
        }
        case Regime::MomentSG:
        case Regime::MomentLSI: {
            double base = require_param(regime, "base");
            return [kind, base](double C, const FitPoint& pt) {
                return moment_growth_shape(kind, static_cast<int>(point_param(pt, "p")), C, base);
            };
        }
        case Regime::PsiL:
        case Regime::PsiP0Alpha:
            throw std::invalid_argument("fit_constant: " + regime_name(kind) +
                                        " is a shape function, not a domination curve");
    }
    throw std::logic_error("curve_for: unreachable");
}

constexpr double kCMin = 1e-12;
constexpr double kCMax = 1e12;

}  // namespace

FitResult fit_constant(const BoundRegime& regime, const std::vector<FitPoint>& points,
                       const weights::WeightFamily* w, const weights::DimensionContext* ctx) {
    if (points.size() < 1) throw std::invalid_argument("fit_constant: needs at least one point");
    auto curve = curve_for(regime, w, ctx);

    double c_fit = kCMin;
    bool impossible = false;
    std::string impossible_point;
    for (const auto& pt : points) {
        double target = pt.value + 3.0 * pt.std_error;
        if (!(target > 0.0)) {
            throw std::invalid_argument("fit_constant: nonpositive target at point " + pt.id);
        }
        if (curve(kCMax, pt) < target) {
            impossible = true;
            impossible_point = pt.id;
            continue;
        }
        // Smallest dominating C by bisection; the curve is nondecreasing in C.
        double lo = kCMin, hi = kCMax;
        if (curve(lo, pt) >= target) {
            c_fit = std::max(c_fit, lo);
            continue;
        }
        for (int iter = 0; iter < 200; ++iter) {
            double mid = std::sqrt(lo * hi);  // geometric bisection
            if (curve(mid, pt) >= target) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        c_fit = std::max(c_fit, hi);
    }

    FitResult result;
    result.C_fit = impossible ? kCMax : c_fit;
    double margin = std::numeric_limits<double>::infinity();
    std::string worst;
    for (const auto& pt : points) {
        double target = pt.value + 3.0 * pt.std_error;
        double m = std::log(curve(result.C_fit, pt)) - std::log(target);
        if (m < margin) {
            margin = m;
            worst = pt.id;
        }
    }
    result.margin = margin;
    result.dominated = !impossible && margin >= -1e-9;
    result.worst_point = impossible ? impossible_point : worst;
    return result;
}

}  // namespace msfi::bounds
