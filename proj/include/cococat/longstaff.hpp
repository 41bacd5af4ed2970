#pragma once

#include "cococat/errors.hpp"
#include "cococat/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace cococat {

/// Double-square-root (Longstaff) short-rate model
///   dr = theta (m - sqrt(r)) dt + sigma sqrt(r) dW,   m = sigma^2 / (4 theta).
///
/// Writing x = sqrt(r), the model is the arithmetic Brownian motion
///   dx = -(theta / 2) dt + (sigma / 2) dW,   r = x^2,
/// and the closed-form bond price is the Feynman-Kac solution for this signed
/// root (no boundary condition at r = 0). Everything here carries the root as
/// the state variable.
struct LongstaffParams {
    double theta_r = 0.2;
    double sigma_r = 0.03;

    /// Long-run level; always derived.
    double m_r() const { return sigma_r * sigma_r / (4.0 * theta_r); }

    void validate(const std::string& where = "rates") const {
        if (!(theta_r > 0.0) || !std::isfinite(theta_r))
            throw ConfigError(where + ".theta_r", "must be > 0");
        if (!(sigma_r > 0.0) || !std::isfinite(sigma_r))
            throw ConfigError(where + ".sigma_r", "must be > 0");
    }

    friend bool operator==(const LongstaffParams&, const LongstaffParams&) = default;
};

/// Coefficients of P(r, s) = A(s) exp(B(s) r + C(s) sqrt(r)).
struct ZcbCoefficients {
    double s = 0.0;
    double A = 1.0;
    double B = 0.0;
    double C = 0.0;
    double psi = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;

    static ZcbCoefficients at(const LongstaffParams& p, double s) {
        ZcbCoefficients k;
        const double th = p.theta_r;
        const double sg2 = p.sigma_r * p.sigma_r;
        k.s = s;
        k.psi = std::sqrt(2.0 * sg2);
        k.c1 = th * th / (k.psi * sg2);
        k.c2 = k.psi / 4.0 - th * th / (k.psi * k.psi);
        k.c3 = -4.0 * th * th / (k.psi * k.psi * k.psi);
        if (s == 0.0) return k;  // A = 1, B = C = 0 exactly

        // 1 / (1 + e^{psi s}) and (1 - e^{psi s/2})^2 / (1 + e^{psi s}) written
        // to stay finite for large psi s.
        const double ps = k.psi * s;
        const double inv = 1.0 / (1.0 + std::exp(ps));
        const double half = std::exp(-0.5 * ps);
        const double sq_ratio = (1.0 - half) * (1.0 - half) / (1.0 + half * half);
        k.A = std::sqrt(2.0 * inv) * std::exp(k.c1 + k.c2 * s + k.c3 * inv);
        if (!std::isfinite(k.A) || k.A == 0.0) {
            // log form: 0.5 log(2 inv) = 0.5 (log 2 - ps - log1p(e^{-ps}))
            double log_a = 0.5 * (std::log(2.0) - ps - std::log1p(std::exp(-ps))) + k.c1 +
                           k.c2 * s + k.c3 * inv;
            k.A = std::exp(log_a);
        }
        k.B = -k.psi / sg2 + 2.0 * k.psi * inv / sg2;
        k.C = 2.0 * th * sq_ratio / sg2;
        return k;
    }

    double log_price_from_root(double root) const {
        return std::log(A) + B * root * root + C * root;
    }
};

/// Bond price with the signed root x = sqrt(r) as state.
inline double zcb_price_from_root(double root, double s, const LongstaffParams& p) {
    if (s == 0.0) return 1.0;
    const ZcbCoefficients k = ZcbCoefficients::at(p, s);
    return k.A * std::exp(k.B * root * root + k.C * root);
}

/// Zero-coupon bond price P(r0, s) paying one unit in s years.
inline double zcb_price(double r0, double s, const LongstaffParams& p) {
    if (!(r0 >= 0.0)) throw std::invalid_argument("zcb_price: r0 must be >= 0");
    if (!(s >= 0.0)) throw std::invalid_argument("zcb_price: s must be >= 0");
    return zcb_price_from_root(std::sqrt(r0), s, p);
}

/// Simple Delta-period rate implied by the bond curve: (1/P(r0, Delta) - 1) / Delta.
inline double implied_initial_libor(const LongstaffParams& p, double r0, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("implied_initial_libor: Delta must be > 0");
    return (1.0 / zcb_price(r0, delta, p) - 1.0) / delta;
}

/// Forward simple rate over [t, t + Delta] seen from a signed-root state.
inline double libor_from_root(double root, double delta, const LongstaffParams& p) {
    return (1.0 / zcb_price_from_root(root, delta, p) - 1.0) / delta;
}

/// Rate parameters after a Girsanov change with constant kernel gamma
/// (dW = dW' + gamma dt): theta' = theta - gamma sigma, sigma unchanged.
inline LongstaffParams girsanov_transform(const LongstaffParams& p, double gamma) {
    if (gamma == 0.0) return p;
    LongstaffParams q = p;
    q.theta_r = p.theta_r - gamma * p.sigma_r;
    if (!(q.theta_r > 0.0))
        throw NumericalError("girsanov_transform: transformed theta_r = " +
                             std::to_string(q.theta_r) + " is not positive");
    return q;
}

/// Rate model that prices exp(-nu * int r) once the share Brownian motion is
/// removed from the conversion expectation.
///
/// theta* = theta - sigma rho sigma_S (1 - nu), then the nu-scaled rate nu r is
/// again Longstaff with theta = sqrt(nu) theta*, sigma = sqrt(nu) sigma. The
/// scaled model starts from nu r0, see `scaled_discount`.
inline LongstaffParams conversion_measure_params(const LongstaffParams& p, double rho,
                                                 double sigma_S, double nu) {
    if (!(nu > 0.0 && nu <= 1.0))
        throw std::invalid_argument("conversion_measure_params: nu must be in (0, 1]");
    if (nu == 1.0) return p;
    const double theta_star = p.theta_r - p.sigma_r * rho * sigma_S * (1.0 - nu);
    if (!(theta_star > 0.0))
        throw NumericalError("conversion_measure_params: theta* = " + std::to_string(theta_star) +
                             " is not positive");
    const double root_nu = std::sqrt(nu);
    return LongstaffParams{root_nu * theta_star, root_nu * p.sigma_r};
}

/// E[exp(-nu int_0^s r du)] under the share-adjusted measure, i.e.
/// P(nu r0, s; theta_circ, sigma_circ).
inline double scaled_discount(double r0, double s, const LongstaffParams& p, double rho,
                              double sigma_S, double nu) {
    const LongstaffParams q = conversion_measure_params(p, rho, sigma_S, nu);
    return zcb_price(nu * r0, s, q);
}

enum class RateScheme {
    /// Exact Gaussian stepping of the signed root (the closed form's model).
    SignedRoot,
    /// Euler on r with sqrt evaluated at max(r, 0); reflects at zero and so
    /// departs from the closed form once the root can reach zero.
    FullTruncation,
};

struct RatePath {
    std::vector<double> times;
    std::vector<double> rates;
    /// Trapezoidal int_0^t r du at each time.
    std::vector<double> integral;
};

/// Simulates r on a uniform grid of step dt (last step shortened to land on
/// `horizon`); ceil(horizon/dt) + 1 points.
inline RatePath simulate_short_rate_path(const LongstaffParams& p, double r0, double horizon,
                                         double dt, RandomStream& stream,
                                         RateScheme scheme = RateScheme::SignedRoot) {
    if (!(dt > 0.0)) throw std::invalid_argument("simulate_short_rate_path: dt must be > 0");
    if (!(horizon >= 0.0))
        throw std::invalid_argument("simulate_short_rate_path: horizon must be >= 0");
    const auto n_steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-12));
    RatePath path;
    path.times.reserve(n_steps + 1);
    path.rates.reserve(n_steps + 1);
    path.integral.reserve(n_steps + 1);
    path.times.push_back(0.0);
    path.rates.push_back(r0);
    path.integral.push_back(0.0);

    double root = std::sqrt(r0);
    double r = r0;
    double t = 0.0;
    const double m = p.m_r();
    for (std::size_t i = 1; i <= n_steps; ++i) {
        const double t_next = (i == n_steps) ? horizon : static_cast<double>(i) * dt;
        const double h = t_next - t;
        const double dw = std::sqrt(h) * stream.normal();
        double r_next;
        if (scheme == RateScheme::SignedRoot) {
            root += -0.5 * p.theta_r * h + 0.5 * p.sigma_r * dw;
            r_next = root * root;
        } else {
            const double sr = std::sqrt(std::max(r, 0.0));
            r_next = r + p.theta_r * (m - sr) * h + p.sigma_r * sr * dw;
        }
        const double integral =
            path.integral.back() + 0.5 * h * (std::max(r, 0.0) + std::max(r_next, 0.0));
        path.times.push_back(t_next);
        path.rates.push_back(r_next);
        path.integral.push_back(integral);
        r = r_next;
        t = t_next;
    }
    return path;
}

}  // namespace cococat
