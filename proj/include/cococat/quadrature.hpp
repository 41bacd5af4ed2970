#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace cococat {

/// Adaptive 61-point Gauss-Kronrod on [a, b].
template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-12, unsigned max_depth = 20,
                 double* error = nullptr) {
    if (a == b) return 0.0;
    double err = 0.0;
    double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, a, b, max_depth, tol, &err);
    if (error) *error = err;
    return value;
}

/// Non-adaptive 15-point Gauss-Kronrod; for short, smooth pieces.
template <class F>
double integrate_fixed(F&& f, double a, double b) {
    if (a == b) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0);
}

}  // namespace cococat
