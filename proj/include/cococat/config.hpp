#pragma once

#include "cococat/errors.hpp"
#include "cococat/intensity.hpp"
#include "cococat/longstaff.hpp"
#include "cococat/loss.hpp"
#include "cococat/severity.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace cococat {

using json = nlohmann::json;

struct RatesConfig {
    LongstaffParams model;
    double r0 = 0.02;
    /// Initial Delta-LIBOR; std::nullopt in the input means IMPLIED.
    std::optional<double> R0_input;
    /// Value actually used.
    double R0 = 0.0;

    friend bool operator==(const RatesConfig&, const RatesConfig&) = default;
};

struct MarketParams {
    double S0 = 10.0;
    double sigma_S = 0.2;
    double rho = -0.5;
    /// Loss impact on the log share price.
    double alpha = 0.0;
    /// Set when alpha was given as delta / E[X].
    std::optional<double> delta;
    /// Compensator (1 - Lf(alpha)) / alpha, or E[X] when alpha = 0.
    double kappa = 0.0;

    friend bool operator==(const MarketParams&, const MarketParams&) = default;
};

struct ConstantPrice {
    double K = 8.0;
    friend bool operator==(const ConstantPrice&, const ConstantPrice&) = default;
};

struct PowerOfShare {
    double nu = 1.0;
    friend bool operator==(const PowerOfShare&, const PowerOfShare&) = default;
};

using ConversionRule = std::variant<ConstantPrice, PowerOfShare>;

inline std::string rule_label(const ConversionRule& rule) {
    if (const auto* k = std::get_if<ConstantPrice>(&rule)) {
        std::ostringstream os;
        os << "K=" << k->K;
        return os.str();
    }
    std::ostringstream os;
    os << "nu=" << std::get<PowerOfShare>(rule).nu;
    return os.str();
}

/// K for a constant conversion price, nu for a power-of-share price.
inline double rule_parameter(const ConversionRule& rule) {
    if (const auto* k = std::get_if<ConstantPrice>(&rule)) return k->K;
    return std::get<PowerOfShare>(rule).nu;
}

struct CocoCatTerms {
    double Z = 1.0;
    double T = 5.0;
    double Delta = 0.25;
    double c = 0.1;
    double zeta = 0.2;
    double D = 1.3e10;
    ConversionRule conversion = ConstantPrice{8.0};

    int coupon_count() const { return static_cast<int>(std::lround(T / Delta)); }
    double coupon_date(int i) const { return i * Delta; }

    friend bool operator==(const CocoCatTerms&, const CocoCatTerms&) = default;
};

struct ResolvedConfig {
    RatesConfig rates;
    MarketParams market;
    IntensityParams intensity;
    SeverityKind severity = BurrParams{};
    CocoCatTerms contract;
    McSettings mc;
    /// How each derived or defaulted quantity was obtained.
    std::vector<std::string> provenance;

    LossModel loss_model() const { return LossModel::untilted(intensity, severity); }

    friend bool operator==(const ResolvedConfig& a, const ResolvedConfig& b) {
        return a.rates == b.rates && a.market == b.market && a.intensity == b.intensity &&
               a.severity == b.severity && a.contract == b.contract && a.mc.paths == b.mc.paths &&
               a.mc.seed == b.mc.seed && a.mc.substreams == b.mc.substreams &&
               a.provenance == b.provenance;
    }
};

namespace detail {

inline std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline const json& require(const json& obj, const std::string& path, const char* key) {
    if (!obj.is_object() || !obj.contains(key))
        throw ConfigError(path + "." + key, "required field is missing");
    return obj.at(key);
}

inline double number_at(const json& obj, const std::string& path, const char* key) {
    const json& v = require(obj, path, key);
    if (!v.is_number()) throw ConfigError(path + "." + key, "must be a number");
    return v.get<double>();
}

inline std::optional<double> optional_number(const json& obj, const std::string& path,
                                             const char* key) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    if (!obj.at(key).is_number()) throw ConfigError(path + "." + key, "must be a number");
    return obj.at(key).get<double>();
}

inline const json& section(const json& root, const char* key) {
    if (!root.contains(key)) throw ConfigError(key, "required section is missing");
    if (!root.at(key).is_object()) throw ConfigError(key, "must be an object");
    return root.at(key);
}

/// Threshold: a positive number, or the string "inf".
inline double threshold_at(const json& obj, const std::string& path, const char* key) {
    const json& v = require(obj, path, key);
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "Infinity" || s == "+inf") return kCensored;
        throw ConfigError(path + "." + key, "must be a number or \"inf\"");
    }
    if (!v.is_number()) throw ConfigError(path + "." + key, "must be a number or \"inf\"");
    return v.get<double>();
}

inline void check(bool ok, const std::string& field, const std::string& predicate) {
    if (!ok) throw ConfigError(field, "violates " + predicate);
}

}  // namespace detail

inline double compensator_kappa(const SeverityKind& sev, double alpha) {
    if (alpha == 0.0) return severity_mean(sev);
    return laplace_complement(sev, alpha) / alpha;
}

/// Validates raw JSON, fills derived fields, and records provenance.
inline ResolvedConfig parse_config(const json& root) {
    using namespace detail;
    if (!root.is_object()) throw ConfigError("<root>", "config must be a JSON object");
    ResolvedConfig cfg;
    auto& log = cfg.provenance;

    // rates
    const json& rates = section(root, "rates");
    if (auto th = optional_number(rates, "rates", "theta_r")) {
        cfg.rates.model.theta_r = *th;
    } else {
        log.push_back("rates.theta_r: default 0.2");
    }
    if (auto sg = optional_number(rates, "rates", "sigma_r")) {
        cfg.rates.model.sigma_r = *sg;
    } else {
        log.push_back("rates.sigma_r: default 0.03");
    }
    cfg.rates.model.validate("rates");
    cfg.rates.r0 = number_at(rates, "rates", "r0");
    check(cfg.rates.r0 >= 0.0 && std::isfinite(cfg.rates.r0), "rates.r0", "r0 >= 0");
    log.push_back("rates.m_r: derived sigma_r^2/(4 theta_r) = " + fmt_num(cfg.rates.model.m_r()));

    // contract (needed before R0 for Delta)
    const json& contract = section(root, "contract");
    auto& terms = cfg.contract;
    terms.Z = number_at(contract, "contract", "Z");
    terms.T = number_at(contract, "contract", "T");
    terms.Delta = number_at(contract, "contract", "Delta");
    terms.c = number_at(contract, "contract", "c");
    terms.zeta = number_at(contract, "contract", "zeta");
    terms.D = threshold_at(contract, "contract", "D");
    check(terms.Z > 0.0 && std::isfinite(terms.Z), "contract.Z", "Z > 0");
    check(terms.Delta > 0.0 && std::isfinite(terms.Delta), "contract.Delta", "Delta > 0");
    check(terms.T > 0.0 && std::isfinite(terms.T), "contract.T", "T > 0");
    {
        const double n = terms.T / terms.Delta;
        check(std::abs(n - std::round(n)) <= 1e-9 * std::max(1.0, n) && std::round(n) >= 1.0,
              "contract.T", "T is an integer multiple of Delta");
    }
    check(std::isfinite(terms.c), "contract.c", "c finite");
    check(terms.zeta > 0.0 && terms.zeta < 1.0, "contract.zeta", "0 < zeta < 1");
    check(terms.D > 0.0, "contract.D", "D > 0");
    {
        const json& conv = require(contract, "contract", "conversion");
        const json& rule = require(conv, "contract.conversion", "rule");
        if (!rule.is_string()) throw ConfigError("contract.conversion.rule", "must be a string");
        const auto name = rule.get<std::string>();
        if (name == "constant") {
            double K = number_at(conv, "contract.conversion", "K");
            check(K > 0.0 && std::isfinite(K), "contract.conversion.K", "K > 0");
            terms.conversion = ConstantPrice{K};
        } else if (name == "power") {
            double nu = number_at(conv, "contract.conversion", "nu");
            check(nu > 0.0 && nu <= 1.0, "contract.conversion.nu", "0 < nu <= 1");
            terms.conversion = PowerOfShare{nu};
        } else {
            throw ConfigError("contract.conversion.rule", "must be \"constant\" or \"power\"");
        }
    }

    if (rates.contains("R0") && rates.at("R0").is_string()) {
        if (rates.at("R0").get<std::string>() != "IMPLIED")
            throw ConfigError("rates.R0", "must be a number or \"IMPLIED\"");
    } else if (auto R0 = optional_number(rates, "rates", "R0")) {
        check(std::isfinite(*R0), "rates.R0", "R0 finite");
        cfg.rates.R0_input = *R0;
    }
    if (cfg.rates.R0_input) {
        cfg.rates.R0 = *cfg.rates.R0_input;
        log.push_back("rates.R0: given " + fmt_num(cfg.rates.R0));
    } else {
        cfg.rates.R0 = implied_initial_libor(cfg.rates.model, cfg.rates.r0, terms.Delta);
        log.push_back("rates.R0: IMPLIED from bond curve = " + fmt_num(cfg.rates.R0));
    }

    // loss
    const json& loss = section(root, "loss");
    {
        const json& in = require(loss, "loss", "intensity");
        auto& ip = cfg.intensity;
        ip.a = number_at(in, "loss.intensity", "a");
        ip.b = number_at(in, "loss.intensity", "b");
        ip.p = number_at(in, "loss.intensity", "p");
        ip.phase = number_at(in, "loss.intensity", "phase");
        ip.q = number_at(in, "loss.intensity", "q");
        ip.period = number_at(in, "loss.intensity", "period");
        check(ip.q == 0.0 || ip.period > 0.0, "loss.intensity.period", "period > 0");
        if (!ip.identically_zero()) {
            const double lo = min_intensity_on_grid(ip, terms.T);
            if (!(lo > 0.0))
                throw ConfigError("loss.intensity",
                                  "lambda(t) <= 0 detected on [0, T] grid (min " + fmt_num(lo) + ")");
        } else {
            log.push_back("loss.intensity: identically zero (no loss events)");
        }
    }
    {
        const json& sev = require(loss, "loss", "severity");
        const json& kind = require(sev, "loss.severity", "kind");
        if (!kind.is_string()) throw ConfigError("loss.severity.kind", "must be a string");
        const auto name = kind.get<std::string>();
        if (name == "burr") {
            BurrParams b;
            b.c_b = number_at(sev, "loss.severity", "c_b");
            b.k_b = number_at(sev, "loss.severity", "k_b");
            b.zeta_b = number_at(sev, "loss.severity", "zeta_b");
            check(b.c_b > 0.0, "loss.severity.c_b", "c_b > 0");
            check(b.k_b > 0.0, "loss.severity.k_b", "k_b > 0");
            check(b.zeta_b > 0.0, "loss.severity.zeta_b", "zeta_b > 0");
            cfg.severity = b;
        } else if (name == "exponential") {
            ExponentialParams e;
            e.beta = number_at(sev, "loss.severity", "beta");
            check(e.beta > 0.0 && std::isfinite(e.beta), "loss.severity.beta", "beta > 0");
            cfg.severity = e;
        } else {
            throw ConfigError("loss.severity.kind", "must be \"burr\" or \"exponential\"");
        }
    }

    // market
    const json& market = section(root, "market");
    auto& mk = cfg.market;
    mk.S0 = number_at(market, "market", "S0");
    mk.sigma_S = number_at(market, "market", "sigma_S");
    mk.rho = number_at(market, "market", "rho");
    check(mk.S0 > 0.0 && std::isfinite(mk.S0), "market.S0", "S0 > 0");
    check(mk.sigma_S >= 0.0 && std::isfinite(mk.sigma_S), "market.sigma_S", "sigma_S >= 0");
    check(std::abs(mk.rho) <= 1.0, "market.rho", "|rho| <= 1");
    {
        auto alpha = optional_number(market, "market", "alpha");
        auto delta = optional_number(market, "market", "delta");
        if (alpha && delta) throw ConfigError("market.alpha", "give either alpha or delta, not both");
        if (!alpha && !delta) throw ConfigError("market.alpha", "required field is missing (or give delta)");
        const double mean = severity_mean(cfg.severity);
        if (alpha) {
            check(*alpha >= 0.0 && std::isfinite(*alpha), "market.alpha", "alpha >= 0");
            mk.alpha = *alpha;
        } else {
            check(*delta >= 0.0 && std::isfinite(*delta), "market.delta", "delta >= 0");
            check(std::isfinite(mean), "market.delta", "severity mean exists (k_b c_b > 1)");
            mk.delta = *delta;
            mk.alpha = *delta / mean;
            log.push_back("market.alpha: delta / E[X] = " + fmt_num(mk.alpha) + " (E[X] = " +
                          fmt_num(mean) + ")");
        }
        if (mk.alpha == 0.0)
            check(std::isfinite(mean), "market.alpha", "alpha = 0 requires a finite severity mean");
        mk.kappa = compensator_kappa(cfg.severity, mk.alpha);
        log.push_back("market.kappa: " +
                      std::string(mk.alpha == 0.0 ? "E[X]" : "(1 - Lf(alpha)) / alpha") + " = " +
                      fmt_num(mk.kappa));
    }

    // mc
    if (root.contains("mc")) {
        const json& mc = root.at("mc");
        if (!mc.is_object()) throw ConfigError("mc", "must be an object");
        if (auto v = optional_number(mc, "mc", "paths")) {
            check(*v >= 1.0 && *v == std::floor(*v), "mc.paths", "integer paths >= 1");
            cfg.mc.paths = static_cast<std::size_t>(*v);
        }
        if (mc.contains("seed")) {
            if (!mc.at("seed").is_number_integer() || mc.at("seed").get<std::int64_t>() < 0)
                throw ConfigError("mc.seed", "must be a non-negative integer");
            cfg.mc.seed = mc.at("seed").get<std::uint64_t>();
        }
        if (auto v = optional_number(mc, "mc", "substreams")) {
            check(*v >= 1.0 && *v == std::floor(*v), "mc.substreams", "integer substreams >= 1");
            cfg.mc.substreams = static_cast<std::size_t>(*v);
        }
    }
    return cfg;
}

/// Serializes back to the input schema; parse_config(to_json(c)) == c.
inline json to_json(const ResolvedConfig& cfg) {
    json j;
    j["rates"]["theta_r"] = cfg.rates.model.theta_r;
    j["rates"]["sigma_r"] = cfg.rates.model.sigma_r;
    j["rates"]["r0"] = cfg.rates.r0;
    if (cfg.rates.R0_input)
        j["rates"]["R0"] = *cfg.rates.R0_input;
    else
        j["rates"]["R0"] = "IMPLIED";

    j["market"]["S0"] = cfg.market.S0;
    j["market"]["sigma_S"] = cfg.market.sigma_S;
    j["market"]["rho"] = cfg.market.rho;
    if (cfg.market.delta)
        j["market"]["delta"] = *cfg.market.delta;
    else
        j["market"]["alpha"] = cfg.market.alpha;

    const auto& ip = cfg.intensity;
    j["loss"]["intensity"] = {{"a", ip.a}, {"b", ip.b}, {"p", ip.p},
                              {"phase", ip.phase}, {"q", ip.q}, {"period", ip.period}};
    if (const auto* b = std::get_if<BurrParams>(&cfg.severity))
        j["loss"]["severity"] = {{"kind", "burr"}, {"c_b", b->c_b}, {"k_b", b->k_b}, {"zeta_b", b->zeta_b}};
    else
        j["loss"]["severity"] = {{"kind", "exponential"},
                                 {"beta", std::get<ExponentialParams>(cfg.severity).beta}};

    const auto& t = cfg.contract;
    j["contract"] = {{"Z", t.Z}, {"T", t.T}, {"Delta", t.Delta}, {"c", t.c}, {"zeta", t.zeta}};
    if (t.D == kCensored)
        j["contract"]["D"] = "inf";
    else
        j["contract"]["D"] = t.D;
    if (const auto* k = std::get_if<ConstantPrice>(&t.conversion))
        j["contract"]["conversion"] = {{"rule", "constant"}, {"K", k->K}};
    else
        j["contract"]["conversion"] = {{"rule", "power"}, {"nu", std::get<PowerOfShare>(t.conversion).nu}};

    j["mc"] = {{"paths", cfg.mc.paths}, {"seed", cfg.mc.seed}, {"substreams", cfg.mc.substreams}};
    return j;
}

/// Re-validates after programmatic edits (sweeps) by a round trip through JSON.
inline ResolvedConfig revalidate(const json& j) { return parse_config(j); }

inline ResolvedConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path, std::string("JSON parse error: ") + e.what());
    }
    return parse_config(root);
}

/// FNV-1a of the canonical JSON form, as 16 hex digits.
inline std::string config_hash(const ResolvedConfig& cfg) {
    const std::string text = to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace cococat
