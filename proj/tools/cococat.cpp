// cococat: price, sweep, oracle and reproduce commands.

#include "cococat/cococat.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#ifndef COCOCAT_DATA_DIR
#define COCOCAT_DATA_DIR "data"
#endif

namespace {

using namespace cococat;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

McSettings settings_from(const ResolvedConfig& cfg, std::optional<std::size_t> paths, std::uint64_t seed,
                         std::optional<std::size_t> substreams) {
    McSettings mc = cfg.mc;
    if (paths) {
        if (*paths < 1) throw ConfigError("--paths", "must be >= 1");
        mc.paths = *paths;
    }
    if (substreams) {
        if (*substreams < 1) throw ConfigError("--substreams", "must be >= 1");
        mc.substreams = *substreams;
    }
    mc.seed = seed;
    return mc;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    return os;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pricing engine for index-linked CocoCat bonds"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::size_t> paths;
    std::optional<std::size_t> substreams;
    std::uint64_t seed = 0;

    auto* price_cmd = app.add_subcommand("price", "Price one contract (analytic legs + trigger MC)");
    std::string dump_path;
    price_cmd->add_option("--config", config_path, "Config JSON")->required();
    price_cmd->add_option("--paths", paths, "Monte Carlo paths (default: config mc.paths)");
    price_cmd->add_option("--seed", seed, "Master seed")->required();
    price_cmd->add_option("--substreams", substreams, "RNG substreams (default: config mc.substreams)");
    price_cmd->add_option("--dump-breakdown", dump_path, "Write a one-row CSV of the breakdown");

    auto* sweep_cmd = app.add_subcommand("sweep", "Price over a one-parameter grid with a shared seed");
    std::string sweep_path, sweep_out;
    sweep_cmd->add_option("--config", config_path, "Base config JSON (overrides base_config in the sweep file)");
    sweep_cmd->add_option("--sweep", sweep_path, "Sweep spec JSON")->required();
    sweep_cmd->add_option("--out", sweep_out, "Output CSV")->required();
    sweep_cmd->add_option("--paths", paths, "Monte Carlo paths");
    sweep_cmd->add_option("--seed", seed, "Shared seed for every grid point")->required();
    sweep_cmd->add_option("--substreams", substreams, "RNG substreams");

    auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force joint simulation price");
    double dt = 1.0 / 252.0;
    bool compare_flag = false;
    oracle_cmd->add_option("--config", config_path, "Config JSON")->required();
    oracle_cmd->add_option("--paths", paths, "Monte Carlo paths");
    oracle_cmd->add_option("--dt", dt, "Time step in years")->check(CLI::PositiveNumber);
    oracle_cmd->add_option("--seed", seed, "Master seed")->required();
    oracle_cmd->add_option("--substreams", substreams, "RNG substreams");
    oracle_cmd->add_flag("--compare", compare_flag, "Also run the analytic price and report z-scores");

    auto* repro_cmd = app.add_subcommand("reproduce", "Regenerate the threshold table or figure data");
    bool table3 = false, figures = false;
    std::string out_dir = ".";
    auto* t3 = repro_cmd->add_flag("--table3", table3, "table3.csv and deviations.md");
    auto* fg = repro_cmd->add_flag("--figures", figures, "fig_*.csv");
    t3->excludes(fg);
    repro_cmd->add_option("--out", out_dir, "Output directory");
    repro_cmd->add_option("--config", config_path, "Config (default: bundled table2.json)");
    repro_cmd->add_option("--paths", paths, "Monte Carlo paths");
    repro_cmd->add_option("--seed", seed, "Master seed")->required();
    repro_cmd->add_option("--substreams", substreams, "RNG substreams");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (price_cmd->parsed()) {
            const auto cfg = load_config(config_path);
            const auto mc = settings_from(cfg, paths, seed, substreams);
            const auto p = price(cfg, mc);
            std::cout << to_json(p).dump(2) << '\n';
            if (!dump_path.empty()) {
                auto os = open_out(dump_path);
                os << kPriceCsvHeader << '\n';
                write_csv_row(os, p);
            }
        } else if (sweep_cmd->parsed()) {
            const auto spec = load_sweep_spec(sweep_path);
            std::string base_path = config_path.empty() ? spec.base_config : config_path;
            if (base_path.empty()) throw ConfigError("sweep.base_config", "no base config given");
            const auto cfg = load_config(base_path);
            if (spec.shared_seed && *spec.shared_seed != seed)
                std::cerr << "note: --seed " << seed << " overrides shared_seed " << *spec.shared_seed << '\n';
            const auto mc = settings_from(cfg, paths, seed, substreams);
            const auto rows = run_sweep(cfg, spec, mc);
            auto os = open_out(sweep_out);
            write_sweep_csv(os, rows);
            std::cerr << "wrote " << rows.size() << " rows to " << sweep_out << '\n';
        } else if (oracle_cmd->parsed()) {
            const auto cfg = load_config(config_path);
            const auto mc = settings_from(cfg, paths, seed, substreams);
            const auto direct = price_direct(cfg, mc, dt);
            json out;
            out["oracle"] = to_json(direct);
            out["oracle"]["metadata"]["dt"] = dt;
            if (compare_flag) {
                McSettings amc = mc;
                amc.seed = mix64(mc.seed);  // independent draws for the analytic route
                const auto analytic = price(cfg, amc);
                const auto z = compare(analytic, direct);
                out["analytic"] = to_json(analytic);
                out["comparison"] = {{"z_V0", z.z_V0},
                                     {"z_I1", z.z_I1},
                                     {"z_I2", z.z_I2},
                                     {"z_I3", z.z_I3},
                                     {"within_3_se", z.within(3.0)}};
            }
            std::cout << out.dump(2) << '\n';
        } else if (repro_cmd->parsed()) {
            if (!table3 && !figures) throw ConfigError("reproduce", "give --table3 or --figures");
            const std::string path =
                config_path.empty() ? std::string(COCOCAT_DATA_DIR) + "/table2.json" : config_path;
            const auto cfg = load_config(path);
            const auto mc = settings_from(cfg, paths, seed, substreams);
            std::filesystem::create_directories(out_dir);
            const std::filesystem::path dir(out_dir);
            if (table3) {
                const auto t = compute_table3(cfg, mc);
                {
                    auto os = open_out((dir / "table3.csv").string());
                    write_table3_csv(os, t);
                }
                {
                    auto os = open_out((dir / "deviations.md").string());
                    write_deviations_report(os, cfg, t, mc);
                }
                std::cerr << "wrote " << (dir / "table3.csv").string() << " and "
                          << (dir / "deviations.md").string() << '\n';
            } else {
                for (const auto& f : write_figures(cfg, mc, dir)) std::cerr << "wrote " << f << '\n';
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
