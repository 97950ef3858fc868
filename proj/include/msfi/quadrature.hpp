#pragma once

#include <functional>
#include <stdexcept>

namespace msfi {

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Adaptive quadrature of f over the finite interval [a, b].
/// Targets relative error `rel_tol` with absolute floor `abs_floor`; throws
/// QuadratureError if the error estimate ends up above both.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-8, double abs_floor = 1e-12);

/// Adaptive quadrature of f over [a, inf), via the substitution t = 1/(1+s)
/// onto the finite interval (0, 1/(1+a)].
double integrate_upper_inf(const std::function<double(double)>& f, double a,
                           double rel_tol = 1e-8, double abs_floor = 1e-12);

}  // namespace msfi
