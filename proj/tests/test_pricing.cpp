#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace cococat;

namespace {
json canonical() {
    std::ifstream in(COCOCAT_DATA_DIR "/table2.json");
    return json::parse(in);
}
ResolvedConfig with(std::function<void(json&)> f) {
    json j = canonical();
    f(j);
    return parse_config(j);
}
McSettings small(std::uint64_t seed = 1, std::size_t paths = 20000) { return {paths, seed, 32}; }
}  // namespace

TEST(Pricing, ParFloaterIsExactlyPar) {
    const auto cfg = with([](json& j) {
        j["contract"]["c"] = 0.0;
        j["contract"]["D"] = "inf";
    });
    const auto p = price(cfg, small());
    EXPECT_NEAR(p.V0, 1.0, 1e-12);
    EXPECT_EQ(p.I2, 0.0);
    EXPECT_EQ(p.se_total, 0.0);
}

TEST(Pricing, CouponLegTelescopes) {
    const auto cfg = with([](json& j) { j["contract"]["c"] = 0.0; });
    const std::vector<double> ones(20, 1.0), zeros(20, 0.0);
    const double pT = zcb_price(0.02, 5.0, cfg.rates.model);
    EXPECT_NEAR(coupon_leg(cfg.contract, cfg.rates, ones).value, 1.0 - pT, 1e-14);
    EXPECT_EQ(coupon_leg(cfg.contract, cfg.rates, zeros).value, 0.0);
    EXPECT_THROW(coupon_leg(cfg.contract, cfg.rates, std::vector<double>(19, 1.0)), std::invalid_argument);
}

TEST(Pricing, CouponLegSePropagation) {
    const auto cfg = with([](json&) {});
    const std::vector<double> s(20, 0.5), se(20, 0.01);
    const auto w = coupon_weights(cfg.contract, cfg.rates);
    double expected = 0;
    for (double x : w) expected += std::abs(x) * 0.01;
    EXPECT_NEAR(coupon_leg(cfg.contract, cfg.rates, s, se).std_error, expected, 1e-15);
}

TEST(Pricing, SpreadConventions) {
    const auto cfg = with([](json&) {});
    const auto d = coupon_weights(cfg.contract, cfg.rates);
    const auto u = coupon_weights(cfg.contract, cfg.rates, SpreadConvention::Undiscounted);
    EXPECT_EQ(d[0], u[0]);
    for (std::size_t i = 1; i < d.size(); ++i) {
        const double p = zcb_price(0.02, 0.25 * static_cast<double>(i + 1), cfg.rates.model);
        EXPECT_NEAR(u[i] - d[i], 0.1 * 0.25 * (1.0 - p), 1e-15);
    }
}

TEST(Pricing, RedemptionLeg) {
    const auto cfg = with([](json&) {});
    EXPECT_DOUBLE_EQ(redemption_leg(cfg.contract, cfg.rates, 1.0).value, zcb_price(0.02, 5.0, cfg.rates.model));
    EXPECT_EQ(redemption_leg(cfg.contract, cfg.rates, 0.0).value, 0.0);
    EXPECT_THROW(redemption_leg(cfg.contract, cfg.rates, 1.5), std::invalid_argument);
}

TEST(Pricing, ZeroIntensityIsRisklessNote) {
    const auto cfg = with([](json& j) {
        j["loss"]["intensity"] = {{"a", 0.0}, {"b", 0.0}, {"p", 0.0}, {"phase", 0.0}, {"q", 0.0}, {"period", 1.0}};
    });
    const auto p = price(cfg, small());
    const auto& m = cfg.rates.model;
    double expected = (cfg.rates.R0 + 0.1) * 0.25 * zcb_price(0.02, 0.25, m);
    for (int i = 2; i <= 20; ++i)
        expected += 0.1 * 0.25 * zcb_price(0.02, 0.25 * i, m) + zcb_price(0.02, 0.25 * (i - 1), m) -
                    zcb_price(0.02, 0.25 * i, m);
    expected += zcb_price(0.02, 5.0, m);
    EXPECT_NEAR(p.V0, expected, 1e-13);
}

TEST(Pricing, NominalAppliedOnce) {
    const auto a = price(with([](json&) {}), small(3, 5000));
    const auto b = price(with([](json& j) { j["contract"]["Z"] = 100.0; }), small(3, 5000));
    EXPECT_DOUBLE_EQ(b.V0, 100.0 * (b.I1 + b.I2 + b.I3));
    EXPECT_EQ(a.I1, b.I1);
    EXPECT_EQ(a.I2, b.I2);
    EXPECT_NEAR(b.V0, 100.0 * a.V0, 1e-12 * b.V0);
}

TEST(Pricing, ComponentsNonnegative) {
    for (const auto& rule : {oracle::rule_constant(8), oracle::rule_power(1), oracle::rule_power(0.5)}) {
        const auto p = price(with([&](json& j) { j["contract"]["conversion"] = rule; }), small(4, 5000));
        EXPECT_GE(p.I1, 0.0);
        EXPECT_GE(p.I2, 0.0);
        EXPECT_GE(p.I3, 0.0);
        EXPECT_NEAR(p.V0, p.I1 + p.I2 + p.I3, 1e-15);
    }
}

TEST(Pricing, NuOneIgnoresShareParameters) {
    auto base = [](json& j) { j["contract"]["conversion"] = oracle::rule_power(1.0); };
    const auto ref = price(with(base), small(5, 5000));
    for (const auto& f : std::vector<std::function<void(json&)>>{
             [](json& j) { j["market"]["sigma_S"] = 0.45; },
             [](json& j) { j["market"]["rho"] = 0.9; },
             [](json& j) { j["market"]["S0"] = 123.0; }}) {
        const auto p = price(with([&](json& j) {
                                 base(j);
                                 f(j);
                             }),
                             small(5, 5000));
        EXPECT_EQ(p.V0, ref.V0);
        EXPECT_EQ(p.I2, ref.I2);
        EXPECT_EQ(p.se_total, ref.se_total);
    }
}

TEST(Pricing, InfiniteThresholdHasNoConversion) {
    for (const auto& rule : {oracle::rule_constant(8), oracle::rule_power(0.5)}) {
        const auto cfg = with([&](json& j) {
            j["contract"]["conversion"] = rule;
            j["contract"]["D"] = "inf";
        });
        EXPECT_EQ(price(cfg, small()).I2, 0.0);
    }
}

TEST(Pricing, ConversionShrinksWithZeta) {
    const auto a = price(with([](json& j) { j["contract"]["zeta"] = 1e-6; }), small(6, 5000));
    EXPECT_LT(a.I2, 1e-5);
}

TEST(Pricing, ZeroAlphaUsesPhysicalTriggerProbability) {
    const auto cfg = with([](json& j) { j["market"]["alpha"] = 0.0; });
    const auto mc = small(7, 20000);
    const auto leg = conversion_constant_K(cfg, conversion_settings(mc));
    const auto sample = trigger_distribution(cfg.loss_model(), cfg.contract.D, 5.0, conversion_settings(mc));
    EXPECT_DOUBLE_EQ(leg.value, 0.2 / 8.0 * 10.0 * sample.cdf(5.0));
}

TEST(Pricing, LegFunctionsMatchAssembly) {
    const auto cfg = with([](json& j) { j["contract"]["conversion"] = oracle::rule_power(0.5); });
    const auto mc = small(8, 5000);
    EXPECT_DOUBLE_EQ(conversion_power(cfg, conversion_settings(mc)).value, price(cfg, mc).I2);
    EXPECT_THROW(conversion_constant_K(cfg, mc), std::invalid_argument);
}

TEST(Pricing, DegenerateThetaStar) {
    const auto cfg = with([](json& j) {
        j["contract"]["conversion"] = oracle::rule_power(0.5);
        j["market"]["sigma_S"] = 20.0;
        j["market"]["rho"] = 1.0;
    });
    EXPECT_THROW(price(cfg, small()), NumericalError);
}

TEST(Pricing, ThresholdGridMatchesSinglePrices) {
    const auto cfg = with([](json& j) { j["contract"]["conversion"] = oracle::rule_power(0.5); });
    const std::vector<double> Ds{1.3e10, 4.0e10, kCensored};
    const auto mc = small(9, 3000);
    const auto grid = price_thresholds(cfg, Ds, mc);
    for (std::size_t i = 0; i < Ds.size(); ++i) {
        auto c = cfg;
        c.contract.D = Ds[i];
        const auto p = price(c, mc);
        EXPECT_EQ(grid[i].V0, p.V0);
        EXPECT_EQ(grid[i].se_total, p.se_total);
    }
}

TEST(Pricing, MonotoneInThresholdWithSharedSeed) {
    for (const auto& rule : {oracle::rule_constant(8), oracle::rule_power(1), oracle::rule_power(0.5)}) {
        const auto cfg = with([&](json& j) { j["contract"]["conversion"] = rule; });
        const std::vector<double> Ds{1.3e10, 1.8e10, 2.3e10, 2.9e10, 3.4e10, 4.0e10, 9.5e10, 2.5e11, 3.5e11};
        const auto ps = price_thresholds(cfg, Ds, small(10, 20000));
        for (std::size_t i = 1; i < ps.size(); ++i) EXPECT_LE(ps[i - 1].V0, ps[i].V0) << rule.dump() << " i=" << i;
    }
}

TEST(Pricing, SurvivalLegsUseExactExponentialLaw) {
    const auto cfg = parse_config(oracle::small_instance(false, oracle::rule_constant(10)));
    const auto p = price(cfg, small(11, 100000));
    const double exact = exponential_survival_exact(10.0, 1.0, 3.0);
    EXPECT_LT(std::abs(oracle::z(p.I3, p.se_I3, zcb_price(0.02, 1.0, cfg.rates.model) * exact)), 3.0);
}

TEST(Pricing, JsonAndCsv) {
    const auto p = price(with([](json&) {}), small(12, 2000));
    const auto j = to_json(p);
    for (const char* k : {"V0", "I1", "I2", "I3", "se_I1", "se_I2", "se_I3", "se_total", "metadata"})
        EXPECT_TRUE(j.contains(k)) << k;
    EXPECT_EQ(j["metadata"]["n_paths"], 2000);
    EXPECT_EQ(std::string(kPriceCsvHeader), "config_hash,rule,D,T,nu_or_K,V0,I1,I2,I3,se_total,seed,n_paths,sigma_S");
    std::ostringstream os;
    write_csv_row(os, p);
    const std::string row = os.str();
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), 12);
}
