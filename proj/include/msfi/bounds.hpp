#pragma once

#include "msfi/weights.hpp"

#include <map>
#include <string>
#include <vector>

namespace msfi::bounds {

/// The predicted bound curves. Each regime carries exactly one fit slot, the
/// constant C: it sits inside the exponential where the curve has one and is
/// the prefactor otherwise, and every curve is nondecreasing in C.
enum class Regime {
    VarMSG,         // C / pi_*(L)
    TailMSGfct,     // exp(-(delta/C) pi_*(L)^(1/2))
    TailMLSIfct,    // exp(-(delta^2/C) pi_*(L))
    TailOscAlg,     // C e^(-delta/C) (1 + delta^(-2 beta/d) |log delta|) L^(-beta)
    TailOscExpSG,   // exp(-(min(delta, delta^2)/C) L^(min(beta, d/2)))
    TailOscExpLSI,  // exp(-(min(delta, delta^2)/C) L^(min(beta, d)))
    TailMixing,     // C exp(-(1/C) delta^2 (|log delta|+1)^(-d beta/(d+beta)) L^(d beta/(d+beta)))
    CovDecay,       // C * tail_integral(max((x-2)/2, 0))
    MixingDecay,    // C (1 + D/R)^d * tail_integral(max(R-1, 0))
    PsiL,           // (u/L) log(1 + L u / C)
    PsiP0Alpha,     // min(1, u^(2 p0)) exp(u^(2/(2+alpha)))
    MomentSG,       // (C p^2)^p base^p
    MomentLSI,      // (C p)^p base^p
};

Regime regime_from_string(const std::string& name);
std::string regime_name(Regime kind);

struct BoundRegime {
    Regime kind = Regime::VarMSG;
    /// Named parameters the kind requires (C always; beta/d for the
    /// oscillation and mixing regimes; base for the moment shapes; L_param,
    /// p0, alpha for the psi shapes).
    std::map<std::string, double> params;
};

/// Var[X_L] prediction: 1 / pi_*(L).
double predicted_variance(const weights::WeightFamily& w, const weights::DimensionContext& ctx,
                          double L);

/// Right-hand side of the tail regime at (delta, L). Regimes built on pi_*
/// read it from (w, ctx); the others read beta and d from the regime
/// parameters. Missing parameters are rejected by name.
double predicted_tail(const BoundRegime& regime, double delta, double L,
                      const weights::WeightFamily& w, const weights::DimensionContext& ctx);

/// Covariance-decay envelope C * tail_integral(max((|x|-2)/2, 0)).
double predicted_covariance_decay(const weights::WeightFamily& w, double x_norm, double C);

/// Mixing envelope C (1 + D/R)^d * tail_integral(max(R-1, 0)).
double predicted_mixing(const weights::WeightFamily& w, const weights::DimensionContext& ctx,
                        double R, double D, double C);

/// psi_L(u) = (u/L) log(1 + L u / C); convex, increasing, ~ u^2/C as L -> 0.
double psi_l(double u, double L_param, double C);

/// psi_{p0,alpha}(u) = min(1, u^(2 p0)) exp(u^(2/(2+alpha))).
double psi_p0_alpha(double u, double p0, double alpha);

/// Moment growth shapes: (C p^2)^p base^p (spectral gap) and (C p)^p base^p
/// (log-Sobolev upgrade).
double moment_growth_shape(Regime kind, int p, double C, double base);

struct FitPoint {
    std::map<std::string, double> params;  // named coordinates (L, delta, R, D, x_norm, p)
    double value = 0.0;
    double std_error = 0.0;
    std::string id;
};

struct FitResult {
    double C_fit = 0.0;
    bool dominated = false;
    /// min over points of log(bound) - log(value + 3 se); >= 0 iff dominated.
    double margin = 0.0;
    std::string worst_point;
};

/// Smallest C whose curve dominates every empirical value plus three
/// standard errors (comparisons in log scale). If no C up to 1e12 works the
/// result reports dominated = false and names the most violating point.
FitResult fit_constant(const BoundRegime& regime, const std::vector<FitPoint>& points,
                       const weights::WeightFamily* w, const weights::DimensionContext* ctx);

}  // namespace msfi::bounds
