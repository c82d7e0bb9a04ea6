#ifndef QKDVOA_CLI_HPP
#define QKDVOA_CLI_HPP

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qkdvoa/io.hpp"

namespace qkdvoa::cli {

namespace fs = std::filesystem;

inline std::optional<std::uint64_t> env_seed() {
    const char* v = std::getenv("QKDVOA_SEED");
    if (!v || !*v) return std::nullopt;
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ConfigError("QKDVOA_SEED is not an unsigned integer");
    }
}

inline fs::path prepare_out_dir(const std::string& out) {
    if (out.empty()) throw ConfigError("an output directory is required (--out)");
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

struct SimulateArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed_override;
};

inline LoadedScenario load_with_seed(const SimulateArgs& args) {
    LoadedScenario loaded = load_scenario_file(args.config_path);
    std::optional<std::uint64_t> seed = args.seed_override;
    if (!seed) seed = env_seed();
    if (seed) {
        loaded.config.seed = *seed;
        for (auto& [key, value] : loaded.resolved)
            if (key == "scenario.seed") value = std::to_string(*seed);
    }
    return loaded;
}

inline int cmd_simulate(const SimulateArgs& args) {
    const fs::path dir = prepare_out_dir(args.out_dir);
    const LoadedScenario loaded = load_with_seed(args);
    const ChipModel chip = calibrate_chip();
    const ScenarioReport report = run_scenario(loaded.config, chip);

    write_timeseries_csv((dir / "timeseries.csv").string(), report);
    write_blocks_csv((dir / "blocks.csv").string(), report);
    for (std::size_t i = 0; i < report.stage_phase0.size(); ++i) {
        const PhaseNoiseTrace trace =
            simulate_phase_noise(report.noise_used, loaded.config.seed,
                                 static_cast<std::uint32_t>(i));
        write_trace_csv((dir / ("trace_stage" + std::to_string(i + 1) + ".csv")).string(), trace);
    }

    json summary = report_summary_json(report);
    summary.update(resolved_config_json(loaded));
    // The calibrated noise process is part of the resolved configuration:
    // echoing it back bypasses recalibration on replay.
    summary["resolved_config"]["noise.slow_sigma_rad"] =
        format_float_exact(report.noise_used.slow_sigma_rad);
    summary["resolved_config"]["noise.fast_sigma_rad"] =
        format_float_exact(report.noise_used.fast_sigma_rad);
    summary["resolved_config"]["noise.slow_tau_sec"] =
        format_float_exact(report.noise_used.slow_tau_sec);
    write_json_file((dir / "summary.json").string(), summary);
    return 0;
}

inline int cmd_compare(const SimulateArgs& args) {
    const fs::path dir = prepare_out_dir(args.out_dir);
    const LoadedScenario loaded = load_with_seed(args);
    if (loaded.config.variant != VoaVariant::BiasedCascade)
        throw ConfigError("compare expects a biased_cascade scenario as the reference design");

    ScenarioConfig sym = loaded.config;
    sym.id = loaded.config.id + "_symmetric";
    sym.variant = VoaVariant::SymmetricSingle;
    sym.shared_trace_with = loaded.config.id;

    const ChipModel chip = calibrate_chip();
    const ComparisonReport cmp = compare_designs(loaded.config, sym, chip);

    write_timeseries_csv((dir / "timeseries_biased.csv").string(), cmp.a);
    write_timeseries_csv((dir / "timeseries_symmetric.csv").string(), cmp.b);
    write_blocks_csv((dir / "blocks_biased.csv").string(), cmp.a);
    write_blocks_csv((dir / "blocks_symmetric.csv").string(), cmp.b);

    json j;
    j["biased"] = report_summary_json(cmp.a);
    j["symmetric"] = report_summary_json(cmp.b);
    j["alpha_std_ratio"] = json_number(cmp.alpha_std_ratio);
    j["skr_std_ratio"] = json_number(cmp.skr_std_ratio);
    j["block_skr_std_ratio"] = json_number(cmp.block_skr_std_ratio);
    j["overestimation_ratio_biased"] = json_number(cmp.overestimation_ratio_a);
    j["overestimation_ratio_symmetric"] = json_number(cmp.overestimation_ratio_b);
    j.update(resolved_config_json(loaded));
    write_json_file((dir / "comparison.json").string(), j);
    return 0;
}

struct SkrArgs {
    double distance_km = 30.0;
    double modulation_variance = 4.4;
    double excess_noise = 0.05;
    double detector_efficiency = 0.6;
    double electronic_noise = 0.1;
    double reconciliation_efficiency = 0.956;
    double loss_coeff = 0.2;
    double block_length = 1e9;
    double pe_fraction = 0.5;
    std::string mode = "asymptotic";
    std::string out_dir;
};

inline int cmd_skr(const SkrArgs& args) {
    QKDParams p;
    p.distance_km = args.distance_km;
    p.modulation_variance_snu = args.modulation_variance;
    p.excess_noise_snu = args.excess_noise;
    p.detector_efficiency = args.detector_efficiency;
    p.electronic_noise_snu = args.electronic_noise;
    p.reconciliation_efficiency = args.reconciliation_efficiency;
    p.loss_coeff_db_per_km = args.loss_coeff;
    p.block_length = args.block_length;
    p.pe_fraction = args.pe_fraction;

    SkrMode mode;
    if (args.mode == "asymptotic")
        mode = SkrMode::Asymptotic;
    else if (args.mode == "finite-size" || args.mode == "finite_size")
        mode = SkrMode::FiniteSize;
    else
        throw ConfigError("--mode must be asymptotic or finite-size");

    const SkrBreakdown b = secret_key_rate(p, mode);
    json j = to_json(b);
    j["distance_km"] = json_number(args.distance_km);
    j["transmittance"] = json_number(p.transmittance_linear());
    std::cout << j.dump(2) << std::endl;
    if (!args.out_dir.empty())
        write_json_file((prepare_out_dir(args.out_dir) / "skr.json").string(), j);
    return 0;
}

inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Chip VOA stability and CV-QKD key-rate simulator"};
    app.require_subcommand(1);

    // curves
    auto* curves = app.add_subcommand("curves", "Attenuation curves over phase for a bias list");
    std::vector<double> eta_bias{1.0, 0.75, 0.5, 0.25};
    std::size_t grid_size = 1001;
    std::string curves_out;
    curves->add_option("--eta-bias", eta_bias, "Bias coefficients in (0,1]")->expected(-1);
    curves->add_option("--grid-size", grid_size, "Phase grid points (>= 100)");
    curves->add_option("--out", curves_out, "Output directory")->required();

    // chip-map
    auto* chipmap = app.add_subcommand("chip-map", "Attenuation versus the two drive voltages");
    VoltageGrid g1, g2;
    std::string chipmap_out;
    chipmap->add_option("--u1-min", g1.min_v);
    chipmap->add_option("--u1-max", g1.max_v);
    chipmap->add_option("--u1-step", g1.step_v);
    chipmap->add_option("--u2-min", g2.min_v);
    chipmap->add_option("--u2-max", g2.max_v);
    chipmap->add_option("--u2-step", g2.step_v);
    chipmap->add_option("--out", chipmap_out, "Output directory")->required();

    // simulate / compare
    SimulateArgs sim_args;
    std::uint64_t seed_flag = 0;
    auto* simulate = app.add_subcommand("simulate", "Run one stability scenario");
    simulate->add_option("--config", sim_args.config_path, "Scenario config file")->required();
    simulate->add_option("--out", sim_args.out_dir, "Output directory")->required();
    auto* sim_seed = simulate->add_option("--seed", seed_flag, "Seed override");

    SimulateArgs cmp_args;
    std::uint64_t cmp_seed_flag = 0;
    auto* compare = app.add_subcommand("compare", "Biased versus symmetric design on one trace");
    compare->add_option("--config", cmp_args.config_path, "Scenario config file")->required();
    compare->add_option("--out", cmp_args.out_dir, "Output directory")->required();
    auto* cmp_seed = compare->add_option("--seed", cmp_seed_flag, "Seed override");

    // skr
    SkrArgs skr_args;
    auto* skr = app.add_subcommand("skr", "Secret-key-rate breakdown for one parameter set");
    skr->add_option("--distance-km", skr_args.distance_km);
    skr->add_option("--modulation-variance", skr_args.modulation_variance);
    skr->add_option("--excess-noise", skr_args.excess_noise);
    skr->add_option("--detector-efficiency", skr_args.detector_efficiency);
    skr->add_option("--electronic-noise", skr_args.electronic_noise);
    skr->add_option("--reconciliation-efficiency", skr_args.reconciliation_efficiency);
    skr->add_option("--loss-coeff", skr_args.loss_coeff);
    skr->add_option("--block-length", skr_args.block_length);
    skr->add_option("--pe-fraction", skr_args.pe_fraction);
    skr->add_option("--mode", skr_args.mode, "asymptotic | finite-size");
    skr->add_option("--out", skr_args.out_dir, "Optional output directory");

    // tradeoff
    auto* tradeoff = app.add_subcommand("tradeoff", "Bias-coefficient design tradeoff table");
    double alpha_target = 38.0, delta_max = 0.016 * kPi, coupler_loss = 8.0;
    double eta_min = 0.1, eta_max = 1.0, eta_step = 0.05;
    std::string tradeoff_out;
    tradeoff->add_option("--alpha-target", alpha_target, "Total attenuation target, dB");
    tradeoff->add_option("--delta-max", delta_max, "Phase fluctuation half-range, rad");
    tradeoff->add_option("--coupler-loss", coupler_loss, "Fixed coupler loss, dB");
    tradeoff->add_option("--eta-min", eta_min);
    tradeoff->add_option("--eta-max", eta_max);
    tradeoff->add_option("--eta-step", eta_step);
    tradeoff->add_option("--out", tradeoff_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            std::cout << app.help() << std::endl;
            return 0;
        }
        std::cerr << e.what() << std::endl;
        return 2;
    }

    try {
        if (curves->parsed()) {
            const CurveSweep sweep = sweep_attenuation_curves(eta_bias, grid_size);
            write_curves_csv((prepare_out_dir(curves_out) / "curves.csv").string(), sweep);
            return 0;
        }
        if (chipmap->parsed()) {
            const VoltageMap map = sweep_voltage_map(calibrate_chip(), g1, g2);
            const fs::path dir = prepare_out_dir(chipmap_out);
            write_voltage_map_csv((dir / "voltage_map.csv").string(), map);
            json j{{"argmax_u1_v", json_number(map.argmax_u1)},
                   {"argmax_u2_v", json_number(map.argmax_u2)},
                   {"max_alpha_db", json_number(map.max_alpha_db)}};
            write_json_file((dir / "voltage_map_summary.json").string(), j);
            return 0;
        }
        if (simulate->parsed()) {
            if (sim_seed->count()) sim_args.seed_override = seed_flag;
            return cmd_simulate(sim_args);
        }
        if (compare->parsed()) {
            if (cmp_seed->count()) cmp_args.seed_override = cmp_seed_flag;
            return cmd_compare(cmp_args);
        }
        if (skr->parsed()) return cmd_skr(skr_args);
        if (tradeoff->parsed()) {
            std::vector<double> grid;
            for (double e = eta_min; e <= eta_max + 1e-12; e += eta_step) grid.push_back(e);
            const auto rows = bias_tradeoff_sweep(grid, alpha_target, delta_max, coupler_loss);
            write_tradeoff_csv((prepare_out_dir(tradeoff_out) / "tradeoff.csv").string(), rows);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 2;
    } catch (const CalibrationError& e) {
        std::cerr << "calibration error: " << e.what() << std::endl;
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << std::endl;
        return 3;
    }
    return 0;
}

}  // namespace qkdvoa::cli

#endif
