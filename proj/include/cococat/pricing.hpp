#pragma once

#include "cococat/config.hpp"
#include "cococat/intensity.hpp"
#include "cococat/longstaff.hpp"
#include "cococat/loss.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cococat {

/// Time-zero price and its three legs; legs are per unit nominal.
struct PriceBreakdown {
    double V0 = 0.0;
    double I1 = 0.0;
    double I2 = 0.0;
    double I3 = 0.0;
    double se_I1 = 0.0;
    double se_I2 = 0.0;
    double se_I3 = 0.0;
    /// SE of V0, with the covariance of I1 and I3 included.
    double se_total = 0.0;

    std::string config_hash;
    std::string rule;
    double rule_parameter = 0.0;
    double D = 0.0;
    double T = 0.0;
    double sigma_S = 0.0;
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;
    std::string survival_measure = "physical";
    std::string conversion_measure = "physical";
};

// ---------------------------------------------------------------- legs

enum class SpreadConvention {
    /// c Delta P(r0, t_i): the spread paid at t_i, discounted.
    Discounted,
    /// c Delta with no discount factor (only for comparison runs).
    Undiscounted,
};

/// Weights w_i with coupon leg = sum_i w_i P(L_{t_i} < D):
/// w_1 = (R0 + c) Delta P(t_1), w_i = c Delta P(t_i) + P(t_{i-1}) - P(t_i).
inline std::vector<double> coupon_weights(const CocoCatTerms& terms, const RatesConfig& rates,
                                          SpreadConvention spread = SpreadConvention::Discounted) {
    const int n = terms.coupon_count();
    std::vector<double> w(static_cast<std::size_t>(n));
    double prev = zcb_price(rates.r0, terms.coupon_date(1), rates.model);
    w[0] = (rates.R0 + terms.c) * terms.Delta * prev;
    for (int i = 2; i <= n; ++i) {
        const double cur = zcb_price(rates.r0, terms.coupon_date(i), rates.model);
        const double df = spread == SpreadConvention::Discounted ? cur : 1.0;
        w[static_cast<std::size_t>(i - 1)] = terms.c * terms.Delta * df + prev - cur;
        prev = cur;
    }
    return w;
}

/// Coupon leg from survival probabilities at t_1..t_N. SEs, when given, are
/// propagated linearly (as if perfectly correlated, an upper bound).
inline Estimate coupon_leg(const CocoCatTerms& terms, const RatesConfig& rates,
                           std::span<const double> survival,
                           std::span<const double> survival_se = {},
                           SpreadConvention spread = SpreadConvention::Discounted) {
    const auto n = static_cast<std::size_t>(terms.coupon_count());
    if (survival.size() != n)
        throw std::invalid_argument("coupon_leg: need one survival probability per coupon date (" +
                                    std::to_string(n) + "), got " + std::to_string(survival.size()));
    if (!survival_se.empty() && survival_se.size() != n)
        throw std::invalid_argument("coupon_leg: survival_se size mismatch");
    const auto w = coupon_weights(terms, rates, spread);
    CompensatedSum v, se;
    for (std::size_t i = 0; i < n; ++i) {
        v.add(w[i] * survival[i]);
        if (!survival_se.empty()) se.add(std::abs(w[i]) * survival_se[i]);
    }
    return {v.value(), se.value()};
}

inline Estimate redemption_leg(const CocoCatTerms& terms, const RatesConfig& rates,
                               double survival_T, double survival_T_se = 0.0) {
    if (!(survival_T >= 0.0 && survival_T <= 1.0))
        throw std::invalid_argument("redemption_leg: survival_T must lie in [0, 1]");
    const double p = zcb_price(rates.r0, terms.T, rates.model);
    return {p * survival_T, p * survival_T_se};
}

/// phi(theta, s) = (1 - Lf(theta)) Lambda(0, s).
inline double tilt_exponent(double laplace_complement_at_theta, double Lambda) {
    return laplace_complement_at_theta * Lambda;
}

/// Per-trigger-time weight of the power-rule conversion leg (before zeta S0^(1-nu)).
class PowerWeight {
public:
    PowerWeight(const ResolvedConfig& cfg, double nu)
        : nu_(nu), r0_(cfg.rates.r0), Lambda_(cfg.intensity, cfg.contract.T) {
        const auto& mk = cfg.market;
        params_ = conversion_measure_params(cfg.rates.model, mk.rho, mk.sigma_S, nu);
        if (nu != 1.0) {
            share_rate_ = 0.5 * mk.sigma_S * mk.sigma_S * nu * (1.0 - nu);
            comp_alpha_ = laplace_complement(cfg.severity, mk.alpha);
            comp_tilt_ = laplace_complement(cfg.severity, mk.alpha * (1.0 - nu));
        }
    }

    double operator()(double s) const {
        const double bond = zcb_price(nu_ * r0_, s, params_);
        if (nu_ == 1.0) return bond;
        const double L = Lambda_(s);
        const double expo = -share_rate_ * s + (1.0 - nu_) * tilt_exponent(comp_alpha_, L) -
                            tilt_exponent(comp_tilt_, L);
        return std::exp(expo) * bond;
    }

    const LongstaffParams& bond_params() const { return params_; }

private:
    double nu_;
    double r0_;
    CumulativeIntensity Lambda_;
    LongstaffParams params_;
    double share_rate_ = 0.0;
    double comp_alpha_ = 0.0;
    double comp_tilt_ = 0.0;
};

/// Loss model under which the conversion leg's trigger time is drawn.
inline LossModel conversion_model(const ResolvedConfig& cfg) {
    const LossModel base = cfg.loss_model();
    if (std::holds_alternative<ConstantPrice>(cfg.contract.conversion))
        return tilt_model(base, cfg.market.alpha, 0.0);
    return tilt_model(base, cfg.market.alpha, std::get<PowerOfShare>(cfg.contract.conversion).nu);
}

inline double conversion_nu(const ConversionRule& rule) {
    if (std::holds_alternative<ConstantPrice>(rule)) return 0.0;
    return std::get<PowerOfShare>(rule).nu;
}

/// Conversion leg from a trigger sample drawn under conversion_model(cfg).
inline Estimate conversion_leg(const ResolvedConfig& cfg, const TriggerSample& sample) {
    const auto& t = cfg.contract;
    const auto& mk = cfg.market;
    SampleStats stats;
    if (const auto* k = std::get_if<ConstantPrice>(&t.conversion)) {
        const double scale = t.zeta / k->K * mk.S0;
        for (double tau : sample.taus) stats.add(tau <= t.T ? scale : 0.0);
        return {stats.mean(), stats.std_error()};
    }
    const double nu = std::get<PowerOfShare>(t.conversion).nu;
    const double scale = t.zeta * (nu == 1.0 ? 1.0 : std::pow(mk.S0, 1.0 - nu));
    const PowerWeight w(cfg, nu);
    for (double tau : sample.taus) stats.add(tau <= t.T ? scale * w(tau) : 0.0);
    return {stats.mean(), stats.std_error()};
}

/// Constant conversion price K: (zeta / K) S0 P(tau <= T) under the alpha-tilted law.
inline Estimate conversion_constant_K(const ResolvedConfig& cfg, const McSettings& mc) {
    if (!std::holds_alternative<ConstantPrice>(cfg.contract.conversion))
        throw std::invalid_argument("conversion_constant_K: rule is not a constant price");
    if (cfg.contract.D == kCensored || cfg.intensity.identically_zero()) return {0.0, 0.0};
    const auto sample = trigger_distribution(conversion_model(cfg), cfg.contract.D, cfg.contract.T, mc, 0.0);
    return conversion_leg(cfg, sample);
}

/// Power rule S_tau^nu: zeta S0^(1-nu) E^(nu)[1{tau <= T} w(tau)].
inline Estimate conversion_power(const ResolvedConfig& cfg, const McSettings& mc) {
    if (!std::holds_alternative<PowerOfShare>(cfg.contract.conversion))
        throw std::invalid_argument("conversion_power: rule is not a power of the share price");
    if (cfg.contract.D == kCensored || cfg.intensity.identically_zero()) return {0.0, 0.0};
    const double nu = conversion_nu(cfg.contract.conversion);
    const auto sample = trigger_distribution(conversion_model(cfg), cfg.contract.D, cfg.contract.T, mc, nu);
    return conversion_leg(cfg, sample);
}

// ---------------------------------------------------------------- assembly

namespace detail {

struct SurvivalLegs {
    Estimate I1, I3;
    double se_sum = 0.0;
};

/// Coupon and redemption legs from physical first-passage times, with exact
/// per-path SEs (each path contributes sum_i w_i 1{tau > t_i}).
inline SurvivalLegs survival_legs(const ResolvedConfig& cfg, const TriggerSample& sample,
                                  SpreadConvention spread = SpreadConvention::Discounted) {
    const auto& t = cfg.contract;
    const auto w = coupon_weights(t, cfg.rates, spread);
    const double pT = zcb_price(cfg.rates.r0, t.T, cfg.rates.model);
    // cumulative weights: a path triggered in (t_{j-1}, t_j] earns w_1..w_{j-1}
    std::vector<double> cum(w.size() + 1, 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) cum[i + 1] = cum[i] + w[i];
    SampleStats s1, s3, sum;
    for (double tau : sample.taus) {
        std::size_t paid = w.size();
        if (tau <= t.T) {
            // number of coupon dates strictly before tau
            paid = static_cast<std::size_t>(std::ceil(tau / t.Delta)) - 1;
            if (paid > w.size()) paid = w.size();
            while (paid < w.size() && t.coupon_date(static_cast<int>(paid) + 1) < tau) ++paid;
            while (paid > 0 && t.coupon_date(static_cast<int>(paid)) >= tau) --paid;
        }
        const double a = cum[paid];
        const double b = tau > t.T ? pT : 0.0;
        s1.add(a);
        s3.add(b);
        sum.add(a + b);
    }
    return {{s1.mean(), s1.std_error()}, {s3.mean(), s3.std_error()}, sum.std_error()};
}

inline PriceBreakdown assemble(const ResolvedConfig& cfg, const McSettings& mc,
                               const SurvivalLegs& legs, const Estimate& I2,
                               const std::string& conv_measure) {
    PriceBreakdown out;
    const double Z = cfg.contract.Z;
    out.I1 = legs.I1.value;
    out.I3 = legs.I3.value;
    out.I2 = I2.value;
    out.se_I1 = legs.I1.std_error;
    out.se_I3 = legs.I3.std_error;
    out.se_I2 = I2.std_error;
    out.V0 = Z * (out.I1 + out.I2 + out.I3);
    out.se_total = Z * std::sqrt(legs.se_sum * legs.se_sum + I2.std_error * I2.std_error);
    out.config_hash = config_hash(cfg);
    out.rule = std::holds_alternative<ConstantPrice>(cfg.contract.conversion) ? "constant" : "power";
    out.rule_parameter = rule_parameter(cfg.contract.conversion);
    out.D = cfg.contract.D;
    out.T = cfg.contract.T;
    out.sigma_S = cfg.market.sigma_S;
    out.seed = mc.seed;
    out.n_paths = mc.paths;
    out.conversion_measure = conv_measure;
    return out;
}

}  // namespace detail

/// Settings for the two trigger samples: lane 0 physical, lane 1 conversion.
inline McSettings survival_settings(McSettings mc) {
    mc.lane = 0;
    return mc;
}
inline McSettings conversion_settings(McSettings mc) {
    mc.lane = 1;
    return mc;
}

/// Price with no possible trigger (D = inf or lambda = 0): closed form only.
inline PriceBreakdown riskless_price(const ResolvedConfig& cfg, const McSettings& mc,
                                     SpreadConvention spread = SpreadConvention::Discounted) {
    const auto n = static_cast<std::size_t>(cfg.contract.coupon_count());
    const std::vector<double> ones(n, 1.0);
    detail::SurvivalLegs legs{coupon_leg(cfg.contract, cfg.rates, ones, {}, spread),
                              redemption_leg(cfg.contract, cfg.rates, 1.0), 0.0};
    return detail::assemble(cfg, mc, legs, {0.0, 0.0}, "none");
}

/// Prices one contract for each threshold in `Ds` from shared trigger samples.
/// Each entry equals price() of the config with contract.D replaced.
inline std::vector<PriceBreakdown> price_thresholds(const ResolvedConfig& cfg,
                                                    std::span<const double> Ds,
                                                    const McSettings& mc,
                                                    SpreadConvention spread = SpreadConvention::Discounted) {
    std::vector<PriceBreakdown> out(Ds.size());
    std::vector<double> finite;
    std::vector<std::size_t> finite_idx;
    for (std::size_t j = 0; j < Ds.size(); ++j) {
        if (!(Ds[j] > 0.0)) throw std::invalid_argument("price_thresholds: D must be > 0");
        ResolvedConfig c = cfg;
        c.contract.D = Ds[j];
        if (Ds[j] == kCensored || cfg.intensity.identically_zero()) {
            out[j] = riskless_price(c, mc, spread);
        } else {
            finite.push_back(Ds[j]);
            finite_idx.push_back(j);
        }
    }
    if (finite.empty()) return out;

    const double T = cfg.contract.T;
    const LossModel conv = conversion_model(cfg);
    const double nu = conversion_nu(cfg.contract.conversion);
    // validates theta* before any simulation
    if (nu > 0.0) (void)conversion_measure_params(cfg.rates.model, cfg.market.rho, cfg.market.sigma_S, nu);
    const auto phys = simulate_triggers(cfg.loss_model(), finite, T, survival_settings(mc));
    const auto tilted = simulate_triggers(conv, finite, T, conversion_settings(mc), nu);
    for (std::size_t k = 0; k < finite.size(); ++k) {
        ResolvedConfig c = cfg;
        c.contract.D = finite[k];
        const auto legs = detail::survival_legs(c, phys[k], spread);
        const auto I2 = conversion_leg(c, tilted[k]);
        out[finite_idx[k]] = detail::assemble(c, mc, legs, I2, tilted[k].measure.label());
    }
    return out;
}

inline PriceBreakdown price(const ResolvedConfig& cfg, const McSettings& mc) {
    const double D[1] = {cfg.contract.D};
    return price_thresholds(cfg, D, mc).front();
}

inline PriceBreakdown price(const ResolvedConfig& cfg) { return price(cfg, cfg.mc); }

// ---------------------------------------------------------------- output

inline std::string format_double(double v) {
    if (v == kCensored) return "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline nlohmann::json to_json(const PriceBreakdown& p) {
    nlohmann::json j;
    j["V0"] = p.V0;
    j["I1"] = p.I1;
    j["I2"] = p.I2;
    j["I3"] = p.I3;
    j["se_I1"] = p.se_I1;
    j["se_I2"] = p.se_I2;
    j["se_I3"] = p.se_I3;
    j["se_total"] = p.se_total;
    j["metadata"] = {{"config_hash", p.config_hash},
                     {"rule", p.rule},
                     {"nu_or_K", p.rule_parameter},
                     {"D", p.D == kCensored ? nlohmann::json("inf") : nlohmann::json(p.D)},
                     {"T", p.T},
                     {"sigma_S", p.sigma_S},
                     {"seed", p.seed},
                     {"n_paths", p.n_paths},
                     {"survival_measure", p.survival_measure},
                     {"conversion_measure", p.conversion_measure}};
    return j;
}

inline const char* kPriceCsvHeader =
    "config_hash,rule,D,T,nu_or_K,V0,I1,I2,I3,se_total,seed,n_paths,sigma_S";

inline void write_csv_row(std::ostream& os, const PriceBreakdown& p) {
    os << p.config_hash << ',' << p.rule << ',' << format_double(p.D) << ',' << format_double(p.T)
       << ',' << format_double(p.rule_parameter) << ',' << format_double(p.V0) << ','
       << format_double(p.I1) << ',' << format_double(p.I2) << ',' << format_double(p.I3) << ','
       << format_double(p.se_total) << ',' << p.seed << ',' << p.n_paths << ','
       << format_double(p.sigma_S) << '\n';
}

}  // namespace cococat
