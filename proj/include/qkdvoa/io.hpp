#ifndef QKDVOA_IO_HPP
#define QKDVOA_IO_HPP

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkdvoa/config.hpp"
#include "qkdvoa/csv.hpp"
#include "qkdvoa/harness.hpp"

namespace qkdvoa {

using json = nlohmann::ordered_json;

// Doubles pass through the 12-significant-digit dataset format before entering
// JSON so numeric output bytes stay reproducible.
inline json json_number(double x) {
    if (std::isnan(x)) return nullptr;
    return json::parse(format_float(x));
}

inline json to_json(const SummaryStats& s) {
    return json{{"mean", json_number(s.mean)},
                {"std", json_number(s.std)},
                {"min", json_number(s.min)},
                {"max", json_number(s.max)},
                {"n", s.n}};
}

inline json to_json(const SkrBreakdown& b) {
    return json{
        {"mode", b.mode == SkrMode::FiniteSize ? "finite_size" : "asymptotic"},
        {"mutual_info_bits", json_number(b.mutual_info_bits)},
        {"holevo_bits", json_number(b.holevo_bits)},
        {"finite_size_bits", json_number(b.finite_size_bits)},
        {"raw_key_rate", json_number(b.raw_key_rate)},
        {"clamped_key_rate", json_number(b.clamped_key_rate)},
        {"symplectic_eigenvalues",
         json::array({json_number(b.symplectic_eigenvalues[0]),
                      json_number(b.symplectic_eigenvalues[1]),
                      json_number(b.symplectic_eigenvalues[2]),
                      json_number(b.symplectic_eigenvalues[3])})},
        {"chi_line", json_number(b.chi_line)},
        {"chi_hom", json_number(b.chi_hom)},
        {"chi_tot", json_number(b.chi_tot)},
        {"A", json_number(b.big_a)},
        {"B", json_number(b.big_b)},
        {"C", json_number(b.big_c)},
        {"D", json_number(b.big_d)},
        {"worst_case_transmittance", json_number(b.worst_case_transmittance)},
        {"worst_case_excess_noise", json_number(b.worst_case_excess_noise)},
        {"key_fraction", json_number(b.key_fraction)}};
}

inline json noise_to_json(const PhaseNoiseConfig& n) {
    return json{{"slow_sigma_rad", json_number(n.slow_sigma_rad)},
                {"slow_tau_sec", json_number(n.slow_tau_sec)},
                {"fast_sigma_rad", json_number(n.fast_sigma_rad)},
                {"sample_rate_hz", json_number(n.sample_rate_hz)},
                {"duration_sec", json_number(n.duration_sec)}};
}

inline json report_summary_json(const ScenarioReport& r) {
    json j;
    j["scenario_id"] = r.config.id;
    j["variant"] = r.config.variant == VoaVariant::BiasedCascade ? "biased_cascade"
                                                                 : "symmetric_single";
    j["distance_km"] = json_number(r.config.distance_km);
    j["seed"] = r.config.seed;
    j["blocks"] = r.per_block.size();
    j["target_skr"] = json_number(r.target_skr);
    j["zero_noise_alpha_db"] = json_number(r.zero_noise_alpha_db);
    j["makeup_loss_db"] = json_number(r.makeup_loss_db);
    j["stage_phase0_rad"] = json::array();
    for (double p : r.stage_phase0) j["stage_phase0_rad"].push_back(json_number(p));
    j["stage_voltage_v"] = json::array();
    for (double u : r.stage_voltage) j["stage_voltage_v"].push_back(json_number(u));
    j["noise"] = noise_to_json(r.noise_used);
    j["saturated_count"] = r.saturated_count;
    j["any_unphysical_estimate"] = r.any_unphysical_estimate;
    j["summary"] = json{{"alpha_db", to_json(r.alpha_db)},
                        {"output_power_dbm", to_json(r.output_power_dbm)},
                        {"actual_va_snu", to_json(r.actual_va_snu)},
                        {"believed_skr", to_json(r.believed_skr)},
                        {"true_skr", to_json(r.true_skr)},
                        {"block_believed_skr", to_json(r.block_believed_skr)},
                        {"block_true_skr", to_json(r.block_true_skr)}};
    return j;
}

// Full-precision echo of every configuration key; feeding these values back
// reproduces the run byte-for-byte.
inline json resolved_config_json(const LoadedScenario& loaded) {
    json cfg = json::object();
    for (const auto& [key, value] : loaded.resolved) cfg[key] = value;
    json j;
    j["resolved_config"] = cfg;
    j["defaults_used"] = loaded.defaults_used;
    return j;
}

inline void write_timeseries_csv(const std::string& path, const ScenarioReport& r) {
    CsvWriter csv(path, {"t_sec", "delta1_rad", "delta2_rad", "alpha_db", "saturated",
                         "output_power_dbm", "actual_va_snu", "believed_skr", "true_skr"});
    for (const auto& s : r.per_second) {
        csv.write_row({format_float(s.t_sec), format_float(s.delta1_rad),
                       format_float(s.delta2_rad), format_float(s.alpha_db),
                       s.saturated ? "1" : "0", format_float(s.output_power_dbm),
                       format_float(s.actual_va_snu),
                       s.saturated ? "" : format_float(s.believed_skr),
                       s.saturated ? "" : format_float(s.true_skr)});
    }
}

inline void write_blocks_csv(const std::string& path, const ScenarioReport& r) {
    CsvWriter csv(path, {"block", "believed_skr", "true_skr", "mean_alpha_db", "mean_power_dbm",
                         "mean_va_snu", "samples", "saturated"});
    for (const auto& b : r.per_block) {
        csv.write_row({std::to_string(b.index), format_float(b.believed_skr),
                       format_float(b.true_skr), format_float(b.mean_alpha_db),
                       format_float(b.mean_power_dbm), format_float(b.mean_va_snu),
                       std::to_string(b.samples), std::to_string(b.saturated)});
    }
}

inline void write_curves_csv(const std::string& path, const CurveSweep& sweep) {
    std::vector<std::string> header{"delta_phi_rad"};
    for (double e : sweep.eta_bias) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "alpha_db_eta_bias_%g", e);
        header.push_back(buf);
    }
    CsvWriter csv(path, header);
    for (std::size_t i = 0; i < sweep.delta_phi.size(); ++i) {
        std::vector<std::string> row{format_float(sweep.delta_phi[i])};
        for (const auto& col : sweep.columns) row.push_back(format_float(col[i].alpha_db));
        csv.write_row(row);
    }
}

inline void write_voltage_map_csv(const std::string& path, const VoltageMap& map) {
    CsvWriter csv(path, {"u1_v", "u2_v", "alpha_db", "saturated"});
    for (std::size_t i = 0; i < map.u1.size(); ++i)
        for (std::size_t j = 0; j < map.u2.size(); ++j)
            csv.write_row({format_float(map.u1[i]), format_float(map.u2[j]),
                           format_float(map.alpha[i][j].alpha_db),
                           map.alpha[i][j].saturated ? "1" : "0"});
}

inline void write_tradeoff_csv(const std::string& path, const std::vector<TradeoffRow>& rows) {
    CsvWriter csv(path, {"eta_bias", "alpha_min_db", "alpha_max_db", "max_saturated",
                         "design_alpha_db", "max_deviation_db", "stages_needed"});
    for (const auto& r : rows) {
        csv.write_row({format_float(r.eta_bias), format_float(r.alpha_min_db),
                       format_float(r.alpha_max_db), r.max_saturated ? "1" : "0",
                       format_float(r.design_alpha_db), format_float(r.max_deviation_db),
                       std::to_string(r.stages_needed)});
    }
}

// Trace interchange format: `t_sec, delta_rad` rows, 12 significant digits.
inline void write_trace_csv(const std::string& path, const PhaseNoiseTrace& trace) {
    CsvWriter csv(path, {"t_sec", "delta_rad"});
    for (std::size_t k = 0; k < trace.samples.size(); ++k) {
        csv.write_row({format_float(static_cast<double>(k) / trace.config.sample_rate_hz),
                       format_float(trace.samples[k])});
    }
}

inline std::vector<double> read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open trace file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("t_sec", 0) != 0)
        throw ConfigError("trace file missing 't_sec, delta_rad' header: " + path);
    std::vector<double> samples;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected two columns");
        try {
            samples.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": bad delta_rad value");
        }
    }
    return samples;
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << j.dump(2) << '\n';
}

}  // namespace qkdvoa

#endif
