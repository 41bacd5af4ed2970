#pragma once

#include "cococat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace cococat {

/// lambda(t) = a + b t + p sin(2 pi (t + phase)) + q exp(cos(2 pi t / period)),
/// in events per year.
struct IntensityParams {
    double a = 24.93;
    double b = 0.03;
    double p = 5.61;
    double phase = 7.07;
    double q = 0.30;
    double period = 4.76;

    bool identically_zero() const { return a == 0.0 && b == 0.0 && p == 0.0 && q == 0.0; }
    bool constant() const { return b == 0.0 && p == 0.0 && q == 0.0; }

    friend bool operator==(const IntensityParams&, const IntensityParams&) = default;
};

inline double intensity_at(const IntensityParams& ip, double t) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double v = ip.a + ip.b * t;
    if (ip.p != 0.0) v += ip.p * std::sin(two_pi * (t + ip.phase));
    if (ip.q != 0.0) v += ip.q * std::exp(std::cos(two_pi * t / ip.period));
    return v;
}

/// Upper bound of lambda on [0, horizon], used as the thinning majorant.
inline double intensity_majorant(const IntensityParams& ip, double horizon) {
    return std::max(ip.a, ip.a + ip.b * horizon) + std::abs(ip.p) +
           std::abs(ip.q) * std::numbers::e;
}

/// int_{t1}^{t2} lambda(u) du by adaptive quadrature.
inline double cumulative_intensity(const IntensityParams& ip, double t1, double t2) {
    if (!(t1 >= 0.0 && t2 >= t1))
        throw std::invalid_argument("cumulative_intensity: need 0 <= t1 <= t2");
    if (t1 == t2) return 0.0;
    if (ip.constant()) return ip.a * (t2 - t1);
    auto f = [&](double u) { return intensity_at(ip, u); };
    // Split so each piece spans at most a quarter of the seasonal cycle.
    const auto pieces = static_cast<int>(std::ceil((t2 - t1) * 4.0));
    double total = 0.0;
    for (int i = 0; i < pieces; ++i) {
        double lo = t1 + (t2 - t1) * i / pieces;
        double hi = t1 + (t2 - t1) * (i + 1) / pieces;
        total += integrate(f, lo, hi, 1e-14);
    }
    return total;
}

/// Smallest lambda value on a grid of `points` over [0, horizon].
inline double min_intensity_on_grid(const IntensityParams& ip, double horizon,
                                    int points = 100000) {
    double lo = intensity_at(ip, 0.0);
    for (int i = 1; i <= points; ++i) lo = std::min(lo, intensity_at(ip, horizon * i / points));
    return lo;
}

/// Tabulated Lambda(0, t) for repeated evaluation along simulated paths:
/// exact node values plus a 15-point Gauss-Kronrod correction on the last piece.
class CumulativeIntensity {
public:
    CumulativeIntensity(const IntensityParams& ip, double horizon, double node_spacing = 1.0 / 64.0)
        : params_(ip), spacing_(node_spacing) {
        const auto n = static_cast<std::size_t>(std::ceil(horizon / spacing_)) + 1;
        nodes_.resize(n + 1, 0.0);
        for (std::size_t i = 1; i <= n; ++i) {
            double lo = spacing_ * static_cast<double>(i - 1);
            double hi = spacing_ * static_cast<double>(i);
            nodes_[i] = nodes_[i - 1] + piece(lo, hi);
        }
    }

    double operator()(double t) const {
        if (t <= 0.0) return 0.0;
        if (params_.constant()) return params_.a * t;
        auto i = static_cast<std::size_t>(t / spacing_);
        if (i + 1 >= nodes_.size()) return cumulative_intensity(params_, 0.0, t);
        const double lo = spacing_ * static_cast<double>(i);
        return nodes_[i] + piece(lo, t);
    }

    const IntensityParams& params() const { return params_; }

private:
    double piece(double lo, double hi) const {
        if (params_.constant()) return params_.a * (hi - lo);
        return integrate_fixed([this](double u) { return intensity_at(params_, u); }, lo, hi);
    }

    IntensityParams params_;
    double spacing_;
    std::vector<double> nodes_;
};

}  // namespace cococat
