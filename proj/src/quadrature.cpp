#include "msfi/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>

namespace msfi {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, double abs_floor) {
    if (!(b >= a)) throw QuadratureError("integrate: inverted interval");
    if (a == b) return 0.0;
    double err = 0.0;
    double value = GK::integrate(f, a, b, 18, rel_tol, &err);
    if (err > abs_floor && err > rel_tol * std::abs(value) * 10.0) {
        throw QuadratureError("integrate: failed to reach requested accuracy");
    }
    return value;
}

double integrate_upper_inf(const std::function<double(double)>& f, double a,
                           double rel_tol, double abs_floor) {
    // t = 1/(1+s), s = (1-t)/t, ds = -dt/t^2; [a, inf) maps to (0, 1/(1+a)].
    // The substituted integrand may be endpoint-singular at t = 0 (slowly
    // decaying f), which tanh_sinh absorbs.
    double upper = 1.0 / (1.0 + a);
    auto g = [&f](double t) {
        if (t < 1e-300) return 0.0;  // below this, 1/t is not representable
        double s = (1.0 - t) / t;
        double fs = f(s);
        if (fs == 0.0) return 0.0;
        double inv_t = 1.0 / t;
        return fs * inv_t * inv_t;  // ordered to dodge t*t underflow
    };
    boost::math::quadrature::tanh_sinh<double> integrator;
    double err = 0.0;
    double l1 = 0.0;
    double value = integrator.integrate(g, 0.0, upper, rel_tol, &err, &l1);
    if (err * l1 > abs_floor && err > rel_tol * 10.0) {
        throw QuadratureError("integrate_upper_inf: failed to reach requested accuracy");
    }
    return value;
}

}  // namespace msfi
