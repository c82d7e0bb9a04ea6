#ifndef QKDVOA_CONFIG_HPP
#define QKDVOA_CONFIG_HPP

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qkdvoa/csv.hpp"
#include "qkdvoa/harness.hpp"

namespace qkdvoa {

// Flat `key = value` sections. Unknown keys and duplicate keys are errors so
// configuration drift never passes silently.
class ConfigFile {
public:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool consumed = false;
    };

    static ConfigFile parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_text(buf.str(), path);
    }

    static ConfigFile parse_text(const std::string& text, const std::string& origin = "<text>") {
        ConfigFile cfg;
        cfg.origin_ = origin;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string s = strip(strip_comment(line));
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(lineno) +
                                      ": malformed section header");
                section = strip(s.substr(1, s.size() - 2));
                if (section.empty())
                    throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section");
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
            const std::string key = strip(s.substr(0, eq));
            const std::string value = strip(s.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            const std::string full = section.empty() ? key : section + "." + key;
            if (cfg.entries_.count(full))
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                                  full + "' (first at line " +
                                  std::to_string(cfg.entries_.at(full).line) + ")");
            cfg.entries_[full] = Entry{value, lineno, false};
        }
        return cfg;
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::optional<std::string> get_string(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        it->second.consumed = true;
        return it->second.value;
    }

    std::optional<double> get_double(const std::string& key) const {
        const auto s = get_string(key);
        if (!s) return std::nullopt;
        try {
            std::size_t pos = 0;
            const double v = std::stod(*s, &pos);
            if (pos != s->size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ":" + std::to_string(entries_.at(key).line) +
                              ": value of '" + key + "' is not a number: '" + *s + "'");
        }
    }

    std::optional<std::uint64_t> get_u64(const std::string& key) const {
        const auto s = get_string(key);
        if (!s) return std::nullopt;
        try {
            std::size_t pos = 0;
            const std::uint64_t v = std::stoull(*s, &pos);
            if (pos != s->size()) throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ":" + std::to_string(entries_.at(key).line) +
                              ": value of '" + key + "' is not an unsigned integer: '" + *s + "'");
        }
    }

    // Every key must have been consumed by the loader; anything left is unknown.
    void reject_unknown() const {
        for (const auto& [key, entry] : entries_) {
            if (!entry.consumed)
                throw ConfigError(origin_ + ":" + std::to_string(entry.line) +
                                  ": unknown key '" + key + "'");
        }
    }

    const std::string& origin() const { return origin_; }

private:
    static std::string strip_comment(const std::string& s) {
        const auto pos = s.find('#');
        return pos == std::string::npos ? s : s.substr(0, pos);
    }
    static std::string strip(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    std::map<std::string, Entry> entries_;
    std::string origin_;
};

struct LoadedScenario {
    ScenarioConfig config;
    std::vector<std::string> defaults_used;             // provenance lines
    std::vector<std::pair<std::string, std::string>> resolved;  // exact echo
};

namespace detail {

class ScenarioLoader {
public:
    ScenarioLoader(const ConfigFile& cfg, LoadedScenario& out) : cfg_(cfg), out_(out) {}

    double number(const std::string& key, double def) {
        const auto v = cfg_.get_double(key);
        record(key, format_float_exact(v ? *v : def), !v);
        return v ? *v : def;
    }

    std::uint64_t integer(const std::string& key, std::uint64_t def) {
        const auto v = cfg_.get_u64(key);
        record(key, std::to_string(v ? *v : def), !v);
        return v ? *v : def;
    }

    std::string text(const std::string& key, const std::string& def) {
        const auto v = cfg_.get_string(key);
        record(key, v ? *v : def, !v);
        return v ? *v : def;
    }

    std::optional<double> optional_number(const std::string& key) {
        const auto v = cfg_.get_double(key);
        if (v) record(key, format_float_exact(*v), false);
        return v;
    }

    std::optional<std::string> optional_text(const std::string& key) {
        const auto v = cfg_.get_string(key);
        if (v) record(key, *v, false);
        return v;
    }

private:
    void record(const std::string& key, const std::string& value, bool is_default) {
        out_.resolved.emplace_back(key, value);
        if (is_default) out_.defaults_used.push_back(key + " = " + value + " (default)");
    }

    const ConfigFile& cfg_;
    LoadedScenario& out_;
};

}  // namespace detail

inline LoadedScenario load_scenario(const ConfigFile& cfg) {
    LoadedScenario out;
    detail::ScenarioLoader ld(cfg, out);
    ScenarioConfig& sc = out.config;

    sc.id = ld.text("scenario.id", "scenario");
    sc.distance_km = ld.number("scenario.distance_km", 60.0);
    const std::string variant = ld.text("scenario.voa_variant", "biased_cascade");
    if (variant == "biased_cascade")
        sc.variant = VoaVariant::BiasedCascade;
    else if (variant == "symmetric_single")
        sc.variant = VoaVariant::SymmetricSingle;
    else
        throw ConfigError("scenario.voa_variant must be biased_cascade or symmetric_single");
    sc.symmetric_target_db = ld.number("scenario.symmetric_target_db", 30.0);
    sc.duration_sec = ld.number("scenario.duration_sec", 4800.0);
    sc.block_sec = ld.number("scenario.block_sec", 600.0);
    sc.seed = ld.integer("scenario.seed", 1);
    sc.shared_trace_with = ld.optional_text("scenario.shared_trace_with");
    sc.input_power_dbm = ld.number("scenario.input_power_dbm", -27.26);
    sc.reference_power_dbm = ld.number("scenario.reference_power_dbm", -65.50);
    const std::string mode = ld.text("scenario.skr_mode", "finite_size");
    if (mode == "finite_size")
        sc.skr_mode = SkrMode::FiniteSize;
    else if (mode == "asymptotic")
        sc.skr_mode = SkrMode::Asymptotic;
    else
        throw ConfigError("scenario.skr_mode must be finite_size or asymptotic");
    const std::string agg = ld.text("scenario.block_aggregation", "mean_parameters");
    if (agg == "mean_parameters")
        sc.block_aggregation = BlockAggregation::MeanParameters;
    else if (agg == "mean_skr")
        sc.block_aggregation = BlockAggregation::MeanSkr;
    else
        throw ConfigError("scenario.block_aggregation must be mean_parameters or mean_skr");

    sc.qkd.modulation_variance_snu = ld.number("qkd.modulation_variance_snu", 4.4);
    sc.qkd.loss_coeff_db_per_km = ld.number("qkd.loss_coeff_db_per_km", 0.2);
    sc.qkd.transmittance = ld.optional_number("qkd.transmittance");
    sc.qkd.excess_noise_snu = ld.number("qkd.excess_noise_snu", 0.05);
    sc.qkd.detector_efficiency = ld.number("qkd.detector_efficiency", 0.6);
    sc.qkd.electronic_noise_snu = ld.number("qkd.electronic_noise_snu", 0.1);
    sc.qkd.reconciliation_efficiency = ld.number("qkd.reconciliation_efficiency", 0.956);
    sc.qkd.block_length = ld.number("qkd.block_length", 1e9);
    sc.qkd.pe_fraction = ld.number("qkd.pe_fraction", 0.5);
    sc.qkd.epsilon_smooth = ld.number("qkd.epsilon_smooth", 1e-10);
    sc.qkd.epsilon_pe = ld.number("qkd.epsilon_pe", 1e-10);

    const auto slow_sigma = ld.optional_number("noise.slow_sigma_rad");
    const auto fast_sigma = ld.optional_number("noise.fast_sigma_rad");
    const double slow_tau = ld.number("noise.slow_tau_sec", 300.0);
    const double rate = ld.number("noise.sample_rate_hz", 1.0);
    sc.noise_target_alpha_std_db = ld.number("noise.target_alpha_std_db", 0.071);
    if (slow_sigma.has_value() != fast_sigma.has_value())
        throw ConfigError("noise.slow_sigma_rad and noise.fast_sigma_rad must be set together");
    if (slow_sigma) {
        PhaseNoiseConfig n;
        n.slow_sigma_rad = *slow_sigma;
        n.fast_sigma_rad = *fast_sigma;
        n.slow_tau_sec = slow_tau;
        n.sample_rate_hz = rate;
        n.duration_sec = sc.duration_sec;
        sc.noise = n;
    }

    cfg.reject_unknown();

    if (sc.skr_mode == SkrMode::FiniteSize && !(sc.qkd.pe_fraction > 0.0))
        throw ConfigError("qkd.pe_fraction = 0 makes finite-size parameter estimation impossible");
    if (sc.skr_mode == SkrMode::FiniteSize && !(sc.qkd.pe_fraction < 1.0))
        throw ConfigError("qkd.pe_fraction = 1 leaves no pulses for key extraction");
    try {
        sc.validate();
    } catch (const NumericalError& e) {
        throw ConfigError(std::string("invalid scenario config: ") + e.what());
    }
    return out;
}

inline LoadedScenario load_scenario_file(const std::string& path) {
    return load_scenario(ConfigFile::parse_file(path));
}

}  // namespace qkdvoa

#endif
