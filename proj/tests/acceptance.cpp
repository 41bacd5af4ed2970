// Acceptance run: one PASS/FAIL line per criterion, exit status = number of failures.
// Usage: acceptance [criterion numbers...]   (default: all)

#include "support/oracles.hpp"
#include "support/run.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

using namespace cococat;

namespace {

const std::string kData = COCOCAT_DATA_DIR;

json canonical_json() {
    std::ifstream in(kData + "/table2.json");
    return json::parse(in);
}

struct Verdict {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << "\n    " << (ok ? "ok   " : "FAIL ") << what;
    }
    void note(const std::string& what) { detail << "\n    note " << what; }
};

std::string num(double v, int prec = 6) {
    char b[64];
    std::snprintf(b, sizeof b, "%.*g", prec, v);
    return b;
}

std::string zs(double z) { return "z=" + num(z, 3); }

// 1. par floater
Verdict criterion1() {
    Verdict v;
    oracle::Timer t;
    json j = canonical_json();
    j["contract"]["c"] = 0.0;
    j["contract"]["D"] = "inf";
    const auto p = price(parse_config(j), McSettings{100000, 1, 64});
    const double s = t.seconds();
    v.require(std::abs(p.V0 - 1.0) <= 1e-12, "V0 = " + num(p.V0, 17) + ", |V0 - 1| = " + num(std::abs(p.V0 - 1.0), 3));
    v.require(s < 1.0, "runtime " + num(s, 3) + " s < 1 s");
    return v;
}

// 2. bond prices against Euler simulation of exp(-int r)
Verdict criterion2() {
    Verdict v;
    oracle::Timer t;
    const LongstaffParams p{0.2, 0.03};
    const double dt = 1.0 / 2000;
    const std::size_t n = 1000000;
    const std::vector<double> hs{1.0, 5.0, 10.0};
    const auto mc = oracle::zcb_mc(0.2, 0.03, 0.02, hs, dt, n, 2002);
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double cf = zcb_price(0.02, hs[i], p);
        const double z = oracle::z(mc[i].value, mc[i].std_error, cf);
        v.require(std::abs(z) < 3.0, "s=" + num(hs[i]) + ": closed " + num(cf, 8) + ", MC " + num(mc[i].value, 8) +
                                          " +- " + num(mc[i].std_error, 3) + ", " + zs(z));
    }
    const auto is = oracle::zcb_mc_importance(0.2, 0.03, 0.02, 32.0, dt, n, 3203);
    const double cf32 = zcb_price(0.02, 32.0, p);
    const double z32 = oracle::z(is.value, is.std_error, cf32);
    v.require(std::abs(z32) < 3.0, "s=32: closed " + num(cf32, 8) + ", MC (drift-shifted, reweighted) " +
                                       num(is.value, 8) + " +- " + num(is.std_error, 3) + ", " + zs(z32));
    const double s = t.seconds();
    v.require(s < 120.0, "runtime " + num(s, 4) + " s < 120 s (" + std::to_string(worker_count()) + " worker threads)");
    return v;
}

// 3. analytic route against joint simulation
Verdict criterion3() {
    Verdict v;
    oracle::Timer t;
    std::uint64_t seed = 3000;
    for (bool burr : {false, true}) {
        for (const auto& rule : {oracle::rule_constant(10.0), oracle::rule_power(0.5), oracle::rule_power(1.0)}) {
            const auto cfg = parse_config(oracle::small_instance(burr, rule));
            const auto a = price(cfg, {100000, ++seed, 64});
            const auto d = price_direct(cfg, {100000, ++seed, 64});
            const auto z = compare(a, d);
            v.require(std::abs(z.z_V0) < 3.0,
                      std::string(burr ? "burr" : "exponential") + " " + rule_label(cfg.contract.conversion) +
                          ": analytic " + num(a.V0) + " +- " + num(a.se_total, 2) + ", direct " + num(d.V0) + " +- " +
                          num(d.se_total, 2) + ", " + zs(z.z_V0) + " (legs " + num(z.z_I1, 2) + ", " + num(z.z_I2, 2) +
                          ", " + num(z.z_I3, 2) + ")");
        }
    }
    const double s = t.seconds();
    v.require(s < 300.0, "runtime " + num(s, 4) + " s < 300 s");
    return v;
}

// 4. measure changes
Verdict criterion4() {
    Verdict v;
    oracle::Timer t;
    const auto cfg = parse_config(canonical_json());
    const CumulativeIntensity Lambda(cfg.intensity, 5.0);
    SampleStats sc[2], bs[2];
    RandomStream l(41), f(42);
    for (int p = 0; p < 40000; ++p) {
        const auto b = simulate_joint_path(cfg, l, f, 1.0 / 252, Lambda);
        for (int k = 0; k < 2; ++k) {
            const double target = k == 0 ? 1.0 : 5.0;
            std::size_t i = 0;
            while (std::abs(b.grid[i] - target) > 1e-12) ++i;
            sc[k].add(b.S_C[i]);
            bs[k].add(b.bank[i] * cfg.market.S0 * b.S_F[i] * b.S_C[i]);
        }
    }
    for (int k = 0; k < 2; ++k) {
        const std::string at = k == 0 ? "t=1" : "t=5";
        const double za = oracle::z(sc[k].mean(), sc[k].std_error(), 1.0);
        const double zb = oracle::z(bs[k].mean(), bs[k].std_error(), cfg.market.S0);
        v.require(std::abs(za) < 3.0, "(a) E[S_C] " + at + " = " + num(sc[k].mean()) + ", " + zs(za));
        v.require(std::abs(zb) < 3.0, "(b) E[B S] " + at + " = " + num(bs[k].mean()) + ", " + zs(zb));
    }
    {
        const auto m = cfg.loss_model();
        const double phi = laplace_complement(cfg.severity, cfg.market.alpha) * Lambda(5.0);
        RandomStream rng(43);
        SampleStats s;
        for (int p = 0; p < 100000; ++p) {
            const auto path = simulate_loss_path(m, 5.0, rng);
            s.add(std::exp(-cfg.market.alpha * (path.empty() ? 0.0 : path.back().cumulative) + phi));
        }
        const double z = oracle::z(s.mean(), s.std_error(), 1.0);
        v.require(std::abs(z) < 3.0, "(c) tilt martingale mean at T=5 = " + num(s.mean()) + ", " + zs(z));
    }
    {
        const IntensityParams ip{10.0, 0, 0, 0, 0, 1.0};
        const auto m = tilt_model(LossModel::untilted(ip, ExponentialParams{1.0}), 0.5, 0.0);
        RandomStream rng(44);
        std::vector<double> xs(100000);
        for (auto& x : xs) x = sample_severity(m, rng);
        const auto [d, p] = oracle::ks_test(xs, [](double x) { return 1.0 - std::exp(-1.5 * x); });
        v.require(p > 0.01, "(d) tilted Exponential(1) by 0.5 vs Exponential(1.5): KS D=" + num(d, 3) + ", p=" + num(p, 3));
    }
    const double s = t.seconds();
    v.require(s < 120.0, "runtime " + num(s, 4) + " s < 120 s");
    return v;
}

// 5. threshold table
Verdict criterion5() {
    Verdict v;
    oracle::Timer t;
    const auto cfg = load_config(kData + "/table2.json");
    const McSettings mc{100000, 20240601, 64};
    const auto tab = compute_table3(cfg, mc);
    const auto c = check_table3(tab);
    const char* names[3] = {"K=8", "nu=1", "nu=0.5"};
    for (std::size_t i = 0; i < PublishedTable3::D.size(); ++i) {
        std::string row = "D=" + num(PublishedTable3::D[i], 3) + ":";
        for (std::size_t k = 0; k < 3; ++k)
            row += std::string(" ") + names[k] + " " + num(tab.prices[k][i].V0, 4) + " (published " +
                   num(PublishedTable3::V0[i][k], 4) + ")";
        v.note(row);
    }
    v.require(c.monotone[0] && c.monotone[1] && c.monotone[2], "nondecreasing in D for every rule");
    v.require(c.ordering, "V0(nu=1) <= V0(nu=0.5) for D <= 4e10");
    v.require(c.plateau_common, "plateau rows equal across rules within 2 combined SE");
    for (const auto& n : c.notes) v.note(n);
    // absolute cells are conditional: a miss must be attributed in the deviations report
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "cococat_acceptance_c5";
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "deviations.md");
        write_deviations_report(os, cfg, tab, mc);
    }
    const std::string report = testrun::slurp((dir / "deviations.md").string());
    const bool attributed = report.find("sigma_S scan") != std::string::npos &&
                            report.find("Plateau level") != std::string::npos;
    if (c.plateau_level)
        v.require(true, "plateau within 0.08 of 1.579");
    else
        v.require(attributed, "plateau outside 1.579 +- 0.08; gap attributed in " + (dir / "deviations.md").string());
    if (c.low_cell)
        v.require(true, "K=8, D=1.3e10: " + num(tab.prices[0][0].V0, 4) + " within 0.05 of 0.345");
    else
        v.require(attributed, "K=8, D=1.3e10 outside 0.345 +- 0.05; gap attributed in deviations report");
    const double s = t.seconds();
    v.require(s < 600.0, "runtime " + num(s, 4) + " s < 600 s");
    return v;
}

// 6. nu = 1 invariance
Verdict criterion6() {
    Verdict v;
    oracle::Timer t;
    json base = canonical_json();
    base["contract"]["conversion"] = oracle::rule_power(1.0);
    const McSettings mc{20000, 66, 64};
    const auto ref = price(parse_config(base), mc);
    const std::vector<std::pair<std::string, std::function<void(json&)>>> edits{
        {"sigma_S=0.5", [](json& j) { j["market"]["sigma_S"] = 0.5; }},
        {"sigma_S=0", [](json& j) { j["market"]["sigma_S"] = 0.0; }},
        {"rho=0.8", [](json& j) { j["market"]["rho"] = 0.8; }},
        {"S0=37", [](json& j) { j["market"]["S0"] = 37.0; }}};
    for (const auto& [name, f] : edits) {
        json j = base;
        f(j);
        const auto p = price(parse_config(j), mc);
        v.require(p.V0 == ref.V0 && p.I2 == ref.I2 && p.se_total == ref.se_total,
                  name + ": V0 " + num(p.V0, 17) + " vs " + num(ref.V0, 17));
    }
    const double s = t.seconds();
    v.require(s < 60.0, "runtime " + num(s, 4) + " s < 60 s");
    return v;
}

// 7. reproducible table output through the command line
Verdict criterion7() {
    Verdict v;
    oracle::Timer t;
    const auto root = std::filesystem::temp_directory_path() / "cococat_acceptance_c7";
    std::filesystem::remove_all(root);
    std::filesystem::create_directories(root);
    std::string files[2];
    for (int k = 0; k < 2; ++k) {
        const auto dir = root / ("run" + std::to_string(k));
        const auto r = testrun::run(std::string(COCOCAT_CLI) + " reproduce --table3 --seed 777 --out " + dir.string(),
                                    (root / ("err" + std::to_string(k) + ".txt")).string());
        v.require(r.code == 0, "run " + std::to_string(k + 1) + " exit code " + std::to_string(r.code));
        files[k] = testrun::slurp((dir / "table3.csv").string());
    }
    v.require(!files[0].empty() && files[0] == files[1],
              "table3.csv byte-identical across runs (" + std::to_string(files[0].size()) + " bytes)");
    const auto d0 = testrun::slurp((root / "run0" / "deviations.md").string());
    const auto d1 = testrun::slurp((root / "run1" / "deviations.md").string());
    v.require(!d0.empty() && d0 == d1, "deviations.md byte-identical across runs");
    const double s = t.seconds();
    v.require(s < 1200.0, "runtime " + num(s, 4) + " s < 1200 s");
    return v;
}

// 8. single price at full scale
Verdict criterion8() {
    Verdict v;
    const auto cfg = load_config(kData + "/table2.json");
    oracle::Timer t;
    const auto p = price(cfg, McSettings{100000, 8, 64});
    const double s = t.seconds();
    v.note("V0 = " + num(p.V0) + " +- " + num(p.se_total, 2));
    v.require(s < 10.0, "runtime " + num(s, 4) + " s < 10 s on " + std::to_string(std::thread::hardware_concurrency()) +
                            " hardware thread(s), " + std::to_string(worker_count()) + " worker(s)");
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    const std::vector<std::pair<std::string, Verdict (*)()>> all{
        {"par-floater identity", criterion1},   {"bond price vs simulation", criterion2},
        {"analytic vs joint simulation", criterion3}, {"measure changes", criterion4},
        {"threshold table", criterion5},        {"nu=1 invariance", criterion6},
        {"determinism", criterion7},            {"performance", criterion8}};
    int failures = 0;
    for (std::size_t k = 0; k < all.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!only.empty() && !only.count(id)) continue;
        Verdict v;
        try {
            v = all[k].second();
        } catch (const std::exception& e) {
            v.require(false, std::string("exception: ") + e.what());
        }
        std::cout << "criterion " << id << " " << (v.pass ? "PASS" : "FAIL") << ": " << all[k].first
                  << v.detail.str() << std::endl;
        failures += v.pass ? 0 : 1;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion/criteria failed")
              << std::endl;
    return failures;
}
