#pragma once

#include "cococat/quadrature.hpp"
#include "cococat/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace cococat {

/// Burr type XII: F(x) = 1 - (1 + (x/zeta_b)^c_b)^(-k_b).
struct BurrParams {
    double c_b = 1.57;
    double k_b = 0.7;
    double zeta_b = 9.53e7;

    friend bool operator==(const BurrParams&, const BurrParams&) = default;
};

/// Exponential with rate beta (per currency unit).
struct ExponentialParams {
    double beta = 1.0;

    friend bool operator==(const ExponentialParams&, const ExponentialParams&) = default;
};

using SeverityKind = std::variant<BurrParams, ExponentialParams>;

inline std::string severity_name(const SeverityKind& s) {
    return std::holds_alternative<BurrParams>(s) ? "burr" : "exponential";
}

inline double severity_survival(const SeverityKind& sev, double x) {
    if (x <= 0.0) return 1.0;
    if (const auto* b = std::get_if<BurrParams>(&sev))
        return std::pow(1.0 + std::pow(x / b->zeta_b, b->c_b), -b->k_b);
    return std::exp(-std::get<ExponentialParams>(sev).beta * x);
}

inline double severity_cdf(const SeverityKind& sev, double x) {
    if (x <= 0.0) return 0.0;
    if (const auto* b = std::get_if<BurrParams>(&sev))
        return -std::expm1(-b->k_b * std::log1p(std::pow(x / b->zeta_b, b->c_b)));
    return -std::expm1(-std::get<ExponentialParams>(sev).beta * x);
}

inline double severity_pdf(const SeverityKind& sev, double x) {
    if (x < 0.0) return 0.0;
    if (const auto* b = std::get_if<BurrParams>(&sev)) {
        if (x == 0.0) return b->c_b < 1.0 ? std::numeric_limits<double>::infinity()
                                          : (b->c_b == 1.0 ? b->k_b / b->zeta_b : 0.0);
        const double z = x / b->zeta_b;
        const double zc = std::pow(z, b->c_b);
        return b->k_b * b->c_b / b->zeta_b * std::pow(z, b->c_b - 1.0) *
               std::pow(1.0 + zc, -(b->k_b + 1.0));
    }
    const double beta = std::get<ExponentialParams>(sev).beta;
    return beta * std::exp(-beta * x);
}

/// Inverse cdf on [0, 1).
inline double severity_quantile(const SeverityKind& sev, double u) {
    if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("severity_quantile: u must be in [0, 1)");
    if (const auto* b = std::get_if<BurrParams>(&sev))
        return b->zeta_b * std::pow(std::expm1(-std::log1p(-u) / b->k_b), 1.0 / b->c_b);
    return -std::log1p(-u) / std::get<ExponentialParams>(sev).beta;
}

/// E[X]; +inf for a Burr law with k_b c_b <= 1.
inline double severity_mean(const SeverityKind& sev) {
    if (const auto* b = std::get_if<BurrParams>(&sev)) {
        if (b->k_b * b->c_b <= 1.0) return std::numeric_limits<double>::infinity();
        const double inv_c = 1.0 / b->c_b;
        return b->zeta_b *
               std::exp(std::lgamma(b->k_b - inv_c) + std::lgamma(1.0 + inv_c) - std::lgamma(b->k_b));
    }
    return 1.0 / std::get<ExponentialParams>(sev).beta;
}

namespace detail {

// 1 - Lf(s) = int_0^inf s e^{-s x} S(x) dx = int_0^inf e^{-y} S(y / s) dy.
// Integrated in log y between the natural scales of the two factors; the
// range stops at the 1 - 1e-12 quantile with the remainder handled separately.
inline double burr_laplace_complement(const BurrParams& b, double s) {
    const SeverityKind sev = b;
    const double x_q = severity_quantile(sev, 1.0 - 1e-12);
    const double y_scale = s * b.zeta_b;
    const double y_lo = 1e-12 * std::min(1.0, y_scale);
    const double y_q = s * x_q;

    auto integrand = [&](double u) {
        const double y = std::exp(u);
        return std::exp(-y) * severity_survival(sev, y / s) * y;
    };
    std::vector<double> cuts{std::log(y_lo), std::log(y_scale), 0.0, std::log(y_q)};
    const double u_hi = std::log(y_q);
    std::sort(cuts.begin(), cuts.end());

    double total = y_lo;  // S ~ 1 and e^{-y} ~ 1 on [0, y_lo]
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = std::max(cuts[i], std::log(y_lo));
        const double hi = std::min(cuts[i + 1], u_hi);
        if (hi > lo) total += integrate(integrand, lo, hi, 1e-13, 25);
    }
    // Beyond the quantile: S <= 1e-12 there, and e^{-y} is negligible past y = 60.
    if (y_q < 60.0) total += integrate(integrand, u_hi, std::log(60.0), 1e-13, 25);
    return total;
}

}  // namespace detail

/// 1 - (Lf)(s), computed directly so small values keep relative accuracy.
inline double laplace_complement(const SeverityKind& sev, double s) {
    if (!(s >= 0.0)) throw std::invalid_argument("laplace_transform: s must be >= 0");
    if (s == 0.0) return 0.0;
    if (const auto* b = std::get_if<BurrParams>(&sev)) return detail::burr_laplace_complement(*b, s);
    const double beta = std::get<ExponentialParams>(sev).beta;
    return s / (beta + s);
}

/// (Lf)(s) = E[exp(-s X)].
inline double laplace_transform(const SeverityKind& sev, double s) {
    if (!(s >= 0.0)) throw std::invalid_argument("laplace_transform: s must be >= 0");
    if (s == 0.0) return 1.0;
    if (const auto* e = std::get_if<ExponentialParams>(&sev)) return e->beta / (e->beta + s);
    return 1.0 - laplace_complement(sev, s);
}

/// Draw from the untilted law by inversion of the survival function.
inline double sample_untilted(const SeverityKind& sev, RandomStream& rng) {
    const double u = rng.uniform();
    if (const auto* b = std::get_if<BurrParams>(&sev))
        return b->zeta_b * std::pow(std::expm1(-std::log(u) / b->k_b), 1.0 / b->c_b);
    return -std::log(u) / std::get<ExponentialParams>(sev).beta;
}

}  // namespace cococat
