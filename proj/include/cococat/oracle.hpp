#pragma once

#include "cococat/config.hpp"
#include "cococat/intensity.hpp"
#include "cococat/longstaff.hpp"
#include "cococat/loss.hpp"
#include "cococat/pricing.hpp"
#include "cococat/random.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

namespace cococat {

/// One jointly simulated path of rate, share and loss on a merged grid.
struct PathBundle {
    std::vector<double> grid;
    std::vector<double> r;
    /// B(0, t) = exp(-int_0^t r).
    std::vector<double> bank;
    std::vector<double> S_F;
    std::vector<double> S_C;
    std::vector<double> L;
    /// Signed root of r; r = root^2.
    std::vector<double> root;
    double tau = kCensored;
    /// Grid index of tau, when triggered.
    std::size_t tau_index = 0;
};

namespace detail {

/// dt grid on [0, T] merged with coupon dates and the given event times.
inline std::vector<double> merged_grid(double T, double dt, double Delta,
                                       const std::vector<LossEvent>& events) {
    std::vector<double> g;
    const auto n = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
    for (std::size_t i = 0; i < n; ++i) g.push_back(static_cast<double>(i) * dt);
    g.push_back(T);
    const auto nc = static_cast<int>(std::lround(T / Delta));
    for (int i = 1; i <= nc; ++i) g.push_back(std::min(T, i * Delta));
    for (const auto& e : events) g.push_back(e.time);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end(), [](double a, double b) { return std::abs(a - b) < 1e-13; }),
            g.end());
    return g;
}

}  // namespace detail

/// Simulates the loss path (stream `loss_rng`) and, on the merged grid, the
/// rate and share (stream `fin_rng`). The rate root is stepped exactly; the
/// bank account and log S_F drift use trapezoidal int r.
inline PathBundle simulate_joint_path(const ResolvedConfig& cfg, RandomStream& loss_rng,
                                      RandomStream& fin_rng, double dt,
                                      const CumulativeIntensity& Lambda) {
    if (!(dt > 0.0)) throw std::invalid_argument("simulate_joint_path: dt must be > 0");
    const auto& t = cfg.contract;
    const auto& mk = cfg.market;
    const auto& rp = cfg.rates.model;
    const auto events = simulate_loss_path(cfg.loss_model(), t.T, loss_rng);

    PathBundle b;
    b.grid = detail::merged_grid(t.T, dt, t.Delta, events);
    const std::size_t n = b.grid.size();
    b.r.resize(n);
    b.root.resize(n);
    b.bank.resize(n);
    b.S_F.resize(n);
    b.S_C.resize(n);
    b.L.resize(n);

    const double rho_perp = std::sqrt(std::max(0.0, 1.0 - mk.rho * mk.rho));
    const double ak = mk.alpha * mk.kappa;
    double x = std::sqrt(cfg.rates.r0);
    double integral = 0.0;
    double log_sf = 0.0;
    double loss = 0.0;
    std::size_t ev = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ti = b.grid[i];
        if (i > 0) {
            const double h = ti - b.grid[i - 1];
            const double sq = std::sqrt(h);
            const double z1 = fin_rng.normal();
            const double z2 = mk.rho * z1 + rho_perp * fin_rng.normal();
            const double r_prev = x * x;
            x += -0.5 * rp.theta_r * h + 0.5 * rp.sigma_r * sq * z1;
            const double r_next = x * x;
            const double dint = 0.5 * h * (r_prev + r_next);
            integral += dint;
            log_sf += dint - 0.5 * mk.sigma_S * mk.sigma_S * h + mk.sigma_S * sq * z2;
        }
        while (ev < events.size() && events[ev].time <= ti + 1e-13) loss = events[ev++].cumulative;
        b.root[i] = x;
        b.r[i] = x * x;
        b.bank[i] = std::exp(-integral);
        b.S_F[i] = std::exp(log_sf);
        b.L[i] = loss;
        b.S_C[i] = std::exp(-mk.alpha * loss + ak * Lambda(ti));
        if (b.tau == kCensored && loss >= t.D) {
            b.tau = ti;
            b.tau_index = i;
        }
    }
    return b;
}

/// Per-path payoff components of the pricing expectation (per unit nominal).
struct PathPayoff {
    double I1 = 0.0;
    double I2 = 0.0;
    double I3 = 0.0;
};

inline PathPayoff path_payoff(const ResolvedConfig& cfg, const PathBundle& b) {
    const auto& t = cfg.contract;
    PathPayoff out;
    const int nc = t.coupon_count();
    std::size_t k = 0;
    double R_prev = cfg.rates.R0;
    for (int i = 1; i <= nc; ++i) {
        const double ti = t.coupon_date(i);
        while (k + 1 < b.grid.size() && b.grid[k] < ti - 1e-13) ++k;
        if (!(b.tau > ti)) break;
        out.I1 += (R_prev + t.c) * t.Delta * b.bank[k];
        R_prev = libor_from_root(b.root[k], t.Delta, cfg.rates.model);
    }
    if (b.tau > t.T) {
        out.I3 = b.bank.back();
    } else {
        const std::size_t j = b.tau_index;
        const double S = cfg.market.S0 * b.S_F[j] * b.S_C[j];
        // S / K_P; for K_P = S^nu written as S^(1-nu) so that S = 0 gives 0
        double shares_value;
        if (const auto* kp = std::get_if<ConstantPrice>(&t.conversion))
            shares_value = S / kp->K;
        else
            shares_value = std::pow(S, 1.0 - std::get<PowerOfShare>(t.conversion).nu);
        out.I2 = t.zeta * shares_value * b.bank[j];
    }
    return out;
}

/// Brute-force joint Monte Carlo price. Lane 2 drives losses, lane 3 the
/// financial Brownians, so draws never overlap those of price().
inline PriceBreakdown price_direct(const ResolvedConfig& cfg, const McSettings& mc, double dt = 1.0 / 252.0) {
    if (mc.paths < 1) throw std::invalid_argument("price_direct: paths must be >= 1");
    const std::size_t chunks = std::max<std::size_t>(1, std::min(mc.substreams, mc.paths));
    std::vector<SampleStats> s1(chunks), s2(chunks), s3(chunks), st(chunks);
    const CumulativeIntensity Lambda(cfg.intensity, cfg.contract.T);
    parallel_chunks(mc.paths, chunks, [&](std::size_t c, std::size_t begin, std::size_t end) {
        RandomStream loss_rng(mc.seed, c, 2);
        RandomStream fin_rng(mc.seed, c, 3);
        for (std::size_t p = begin; p < end; ++p) {
            const auto b = simulate_joint_path(cfg, loss_rng, fin_rng, dt, Lambda);
            const auto pay = path_payoff(cfg, b);
            s1[c].add(pay.I1);
            s2[c].add(pay.I2);
            s3[c].add(pay.I3);
            st[c].add(pay.I1 + pay.I2 + pay.I3);
        }
    });
    // merge in chunk order
    auto merge = [](const std::vector<SampleStats>& v) {
        double n = 0, sum = 0, sumsq = 0;
        for (const auto& s : v) {
            const double k = static_cast<double>(s.count());
            n += k;
            sum += s.mean() * k;
            sumsq += s.variance() * (k - 1.0) + s.mean() * s.mean() * k;
        }
        const double m = sum / n;
        const double var = n > 1 ? std::max(0.0, (sumsq - n * m * m) / (n - 1.0)) : 0.0;
        return Estimate{m, std::sqrt(var / n)};
    };
    const auto e1 = merge(s1), e2 = merge(s2), e3 = merge(s3), et = merge(st);
    PriceBreakdown out;
    const double Z = cfg.contract.Z;
    out.I1 = e1.value;
    out.I2 = e2.value;
    out.I3 = e3.value;
    out.se_I1 = e1.std_error;
    out.se_I2 = e2.std_error;
    out.se_I3 = e3.std_error;
    out.V0 = Z * (out.I1 + out.I2 + out.I3);
    out.se_total = Z * et.std_error;
    out.config_hash = config_hash(cfg);
    out.rule = std::holds_alternative<ConstantPrice>(cfg.contract.conversion) ? "constant" : "power";
    out.rule_parameter = rule_parameter(cfg.contract.conversion);
    out.D = cfg.contract.D;
    out.T = cfg.contract.T;
    out.sigma_S = cfg.market.sigma_S;
    out.seed = mc.seed;
    out.n_paths = mc.paths;
    out.survival_measure = "physical (joint simulation)";
    out.conversion_measure = "physical (joint simulation)";
    return out;
}

/// (a - b) / sqrt(se_a^2 + se_b^2); 0 when both SEs vanish and a == b.
inline double z_score(double a, double se_a, double b, double se_b) {
    const double se = std::sqrt(se_a * se_a + se_b * se_b);
    if (se == 0.0) return a == b ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), a - b);
    return (a - b) / se;
}

struct Comparison {
    double z_V0 = 0.0;
    double z_I1 = 0.0;
    double z_I2 = 0.0;
    double z_I3 = 0.0;
    bool within(double k) const {
        return std::abs(z_V0) <= k && std::abs(z_I1) <= k && std::abs(z_I2) <= k && std::abs(z_I3) <= k;
    }
};

inline Comparison compare(const PriceBreakdown& a, const PriceBreakdown& b) {
    return {z_score(a.V0, a.se_total, b.V0, b.se_total), z_score(a.I1, a.se_I1, b.I1, b.se_I1),
            z_score(a.I2, a.se_I2, b.I2, b.se_I2), z_score(a.I3, a.se_I3, b.I3, b.se_I3)};
}

}  // namespace cococat
