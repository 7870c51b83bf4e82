#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace ppmc {

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Adaptive Gauss-Kronrod integral over [a, b]; b may be +infinity.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-10) {
    using boost::math::quadrature::gauss_kronrod;
    double error = 0.0;
    const double v = gauss_kronrod<double, 15>::integrate(
        std::forward<F>(f), a, b, 15, rel_tol, &error);
    if (!std::isfinite(v)) throw QuadratureError("integral did not converge");
    return v;
}

/// tanh-sinh integral over [a, b]; tolerant of integrable endpoint
/// singularities.
template <class F>
double integrate_singular(F&& f, double a, double b, double rel_tol = 1e-10) {
    boost::math::quadrature::tanh_sinh<double> q;
    const double v = q.integrate(std::forward<F>(f), a, b, rel_tol);
    if (!std::isfinite(v)) throw QuadratureError("integral did not converge");
    return v;
}

} // namespace ppmc
