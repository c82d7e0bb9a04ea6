#ifndef QKDVOA_HARNESS_HPP
#define QKDVOA_HARNESS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qkdvoa/drive.hpp"
#include "qkdvoa/noise.hpp"
#include "qkdvoa/photonic.hpp"
#include "qkdvoa/qkd.hpp"

namespace qkdvoa {

struct SummaryStats {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, n-1 denominator
    double min = 0.0;
    double max = 0.0;
    std::size_t n = 0;
};

inline SummaryStats summarize(const std::vector<double>& series) {
    if (series.empty()) throw NumericalError("summary of an empty series");
    if (series.size() == 1)
        throw NumericalError("summary of a singleton series: sample std undefined");
    SummaryStats s;
    s.n = series.size();
    s.min = series.front();
    s.max = series.front();
    double sum = 0.0;
    for (double v : series) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / static_cast<double>(s.n);
    double acc = 0.0;
    for (double v : series) acc += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(acc / static_cast<double>(s.n - 1));
    return s;
}

enum class VoaVariant { BiasedCascade, SymmetricSingle };
enum class BlockAggregation { MeanParameters, MeanSkr };

struct ScenarioConfig {
    std::string id = "scenario";
    double distance_km = 60.0;
    VoaVariant variant = VoaVariant::BiasedCascade;
    double symmetric_target_db = 30.0;
    QKDParams qkd;
    std::optional<PhaseNoiseConfig> noise;      // explicit process wins
    double noise_target_alpha_std_db = 0.071;   // else calibrate to this spread
    double duration_sec = 4800.0;
    double block_sec = 600.0;
    std::uint64_t seed = 1;
    std::optional<std::string> shared_trace_with;
    double input_power_dbm = -27.26;
    double reference_power_dbm = -65.50;        // power anchored to qkd.V_A
    SkrMode skr_mode = SkrMode::FiniteSize;
    BlockAggregation block_aggregation = BlockAggregation::MeanParameters;
    // Mean-attenuation anchor the symmetric comparator's makeup loss levels
    // to; compare_designs sets it to the paired run's realized mean.
    std::optional<double> power_anchor_mean_alpha_db;

    double target_attenuation_db() const { return input_power_dbm - reference_power_dbm; }

    std::size_t block_count() const {
        return static_cast<std::size_t>(std::llround(duration_sec / block_sec));
    }

    void validate() const {
        qkd.validate();
        if (!(duration_sec > 0.0) || !(block_sec > 0.0))
            throw NumericalError("duration and block length must be > 0");
        const double blocks = duration_sec / block_sec;
        if (std::fabs(blocks - std::round(blocks)) > 1e-9 || blocks < 1.0)
            throw NumericalError("duration must be divisible into whole blocks");
        if (!(symmetric_target_db > 0.0))
            throw NumericalError("symmetric target attenuation must be > 0 dB");
        if (!(target_attenuation_db() > 0.0))
            throw NumericalError("input power must exceed the reference output power");
        if (noise) noise->validate();
    }
};

struct SecondSample {
    double t_sec = 0.0;
    double delta1_rad = 0.0;
    double delta2_rad = 0.0;  // zero for the single-MZI variant
    double alpha_db = 0.0;
    bool saturated = false;
    double output_power_dbm = 0.0;
    double actual_va_snu = 0.0;
    double believed_skr = 0.0;  // raw bits/pulse under assumed-V_A estimation
    double true_skr = 0.0;      // raw bits/pulse at the actual V_A
    double estimated_transmittance = 0.0;
    double estimated_excess_noise = 0.0;
    bool unphysical_estimate = false;
};

struct BlockResult {
    std::size_t index = 0;
    double believed_skr = 0.0;
    double true_skr = 0.0;
    double mean_alpha_db = 0.0;
    double mean_power_dbm = 0.0;
    double mean_va_snu = 0.0;
    std::size_t samples = 0;
    std::size_t saturated = 0;
};

struct ScenarioReport {
    ScenarioConfig config;        // with noise/anchor resolved
    PhaseNoiseConfig noise_used;
    std::vector<SecondSample> per_second;
    std::vector<BlockResult> per_block;
    SummaryStats alpha_db, output_power_dbm, actual_va_snu, believed_skr, true_skr;
    SummaryStats block_believed_skr, block_true_skr;
    std::size_t saturated_count = 0;
    bool any_unphysical_estimate = false;
    double makeup_loss_db = 0.0;  // symmetric comparator only
    std::vector<double> stage_phase0;
    std::vector<double> stage_voltage;  // biased cascade only
    double zero_noise_alpha_db = 0.0;
    double target_skr = 0.0;  // rate at the reference modulation variance
};

// Resolve the noise process for a scenario: an explicit config wins,
// otherwise the reference process is calibrated against the biased chip so
// its attenuation spread matches the configured target.
inline PhaseNoiseConfig resolve_noise(const ScenarioConfig& cfg, const ChipModel& chip) {
    if (cfg.noise) {
        PhaseNoiseConfig n = *cfg.noise;
        n.duration_sec = cfg.duration_sec;
        n.validate();
        return n;
    }
    const double stage_db = 0.5 * (cfg.target_attenuation_db() - chip.fixed_loss_db());
    const double phi_op = solve_operating_point(chip.stage(0).curve, stage_db, Branch::Rising);
    const NoiseCalibration cal = calibrate_noise_to_std(
        cfg.noise_target_alpha_std_db, chip, {phi_op, phi_op});
    PhaseNoiseConfig n = cal.config;
    n.duration_sec = cfg.duration_sec;
    return n;
}

namespace detail {

// Believed rate from already-aggregated parameter estimates.
inline SkrBreakdown believed_rate(const QKDParams& base, double assumed_va, double t_hat,
                                  double eps_hat, SkrMode mode) {
    QKDParams believed = base;
    believed.modulation_variance_snu = assumed_va;
    believed.transmittance = t_hat;
    believed.excess_noise_snu = eps_hat;
    return secret_key_rate_impl(believed, mode, /*enforce_physical=*/t_hat <= 1.0);
}

}  // namespace detail

inline ScenarioReport run_scenario(const ScenarioConfig& config, const ChipModel& chip) {
    config.validate();
    ScenarioReport rep;
    rep.config = config;
    rep.noise_used = resolve_noise(config, chip);
    rep.config.noise = rep.noise_used;

    QKDParams qkd = config.qkd;
    qkd.distance_km = config.distance_km;
    const double assumed_va = qkd.modulation_variance_snu;
    rep.target_skr = secret_key_rate(qkd, config.skr_mode).raw_key_rate;

    // Operating points and disturbance traces.
    std::vector<StageOperatingPoint> stages;
    std::vector<PhaseNoiseTrace> traces;
    double fixed_db = 0.0;
    if (config.variant == VoaVariant::BiasedCascade) {
        const double stage_db = 0.5 * (config.target_attenuation_db() - chip.fixed_loss_db());
        for (std::size_t i = 0; i < 2; ++i) {
            const auto& st = chip.stage(i);
            const double phi_want = solve_operating_point(st.curve, stage_db, Branch::Rising);
            const double u = st.shifter.quantize(st.shifter.voltage_for_phase(phi_want));
            const double phi0 = st.shifter.phase_for_voltage(u);
            stages.push_back({st.curve, phi0});
            rep.stage_voltage.push_back(u);
            rep.stage_phase0.push_back(phi0);
            traces.push_back(simulate_phase_noise(rep.noise_used, config.seed,
                                                  static_cast<std::uint32_t>(i)));
        }
        fixed_db = chip.fixed_loss_db();
    } else {
        const AttenuationCurve sym(0.5, 1.0);
        const double phi0 = solve_operating_point(sym, config.symmetric_target_db, Branch::Rising);
        stages.push_back({sym, phi0});
        rep.stage_phase0.push_back(phi0);
        traces.push_back(simulate_phase_noise(rep.noise_used, config.seed, 0));
    }

    const std::size_t n = traces.front().samples.size();
    std::vector<double> alpha_mzi(n);
    std::vector<bool> saturated(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        AttenuationSample total{fixed_db, false};
        for (std::size_t s = 0; s < stages.size(); ++s) {
            const AttenuationSample a =
                stages[s].curve.attenuation_db(stages[s].delta_phi + traces[s].samples[k]);
            total.alpha_db += a.alpha_db;
            total.saturated = total.saturated || a.saturated;
        }
        alpha_mzi[k] = total.alpha_db;
        saturated[k] = total.saturated;
    }

    // The symmetric comparator levels its realized mean attenuation to the
    // anchor through a fixed makeup loss, reproducing an equal-mean-power
    // comparison; the cascade runs as dialed in.
    double zero_noise = 0.0;
    for (const auto& s : stages) zero_noise += s.curve.attenuation_db(s.delta_phi).alpha_db;
    zero_noise += fixed_db;
    if (config.variant == VoaVariant::SymmetricSingle) {
        const double anchor =
            config.power_anchor_mean_alpha_db.value_or(config.target_attenuation_db());
        double mean_mzi = 0.0;
        for (double a : alpha_mzi) mean_mzi += a;
        mean_mzi /= static_cast<double>(n);
        rep.makeup_loss_db = anchor - mean_mzi;
        zero_noise += rep.makeup_loss_db;
    }
    rep.zero_noise_alpha_db = zero_noise;

    // Per-second pipeline: attenuation -> power -> modulation variance ->
    // believed/true rates under one-time calibration.
    rep.per_second.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        SecondSample& s = rep.per_second[k];
        s.t_sec = static_cast<double>(k) / rep.noise_used.sample_rate_hz;
        s.delta1_rad = traces[0].samples[k];
        s.delta2_rad = traces.size() > 1 ? traces[1].samples[k] : 0.0;
        s.alpha_db = alpha_mzi[k] + rep.makeup_loss_db;
        s.saturated = saturated[k];
        s.output_power_dbm = config.input_power_dbm - s.alpha_db;
        s.actual_va_snu = modulation_variance_from_power(
            s.output_power_dbm, config.reference_power_dbm, assumed_va);
        if (s.saturated) {
            s.believed_skr = std::numeric_limits<double>::quiet_NaN();
            s.true_skr = std::numeric_limits<double>::quiet_NaN();
            ++rep.saturated_count;
            continue;
        }
        const MiscalibratedSkr mis =
            skr_under_miscalibration(s.actual_va_snu, assumed_va, qkd, config.skr_mode);
        s.believed_skr = mis.believed.raw_key_rate;
        s.estimated_transmittance = mis.estimated_transmittance;
        s.estimated_excess_noise = mis.estimated_excess_noise;
        s.unphysical_estimate = mis.unphysical_estimate;
        rep.any_unphysical_estimate = rep.any_unphysical_estimate || mis.unphysical_estimate;

        QKDParams actual = qkd;
        actual.modulation_variance_snu = s.actual_va_snu;
        s.true_skr = secret_key_rate(actual, config.skr_mode).raw_key_rate;
    }

    // Block aggregation: one estimation per block from block-mean parameters
    // (a config switch selects plain averaging of per-second rates instead).
    const std::size_t blocks = config.block_count();
    const std::size_t per_block = n / blocks;
    const double t_true = qkd.transmittance_linear();
    for (std::size_t b = 0; b < blocks; ++b) {
        BlockResult blk;
        blk.index = b;
        double sum_t = 0.0, sum_e = 0.0, sum_va = 0.0, sum_a = 0.0, sum_p = 0.0;
        double sum_bel = 0.0, sum_tru = 0.0;
        std::size_t m = 0;
        for (std::size_t k = b * per_block; k < (b + 1) * per_block; ++k) {
            const SecondSample& s = rep.per_second[k];
            blk.samples++;
            sum_a += s.alpha_db;
            sum_p += s.output_power_dbm;
            if (s.saturated) {
                blk.saturated++;
                continue;
            }
            sum_t += s.estimated_transmittance;
            sum_e += s.estimated_excess_noise;
            sum_va += s.actual_va_snu;
            sum_bel += s.believed_skr;
            sum_tru += s.true_skr;
            ++m;
        }
        blk.mean_alpha_db = sum_a / static_cast<double>(per_block);
        blk.mean_power_dbm = sum_p / static_cast<double>(per_block);
        if (m == 0) throw NumericalError("block fully saturated; no rate samples");
        blk.mean_va_snu = sum_va / static_cast<double>(m);
        if (config.block_aggregation == BlockAggregation::MeanParameters) {
            blk.believed_skr =
                detail::believed_rate(qkd, assumed_va, sum_t / static_cast<double>(m),
                                      sum_e / static_cast<double>(m), config.skr_mode)
                    .raw_key_rate;
            QKDParams actual = qkd;
            actual.modulation_variance_snu = blk.mean_va_snu;
            actual.transmittance = t_true;
            blk.true_skr = secret_key_rate(actual, config.skr_mode).raw_key_rate;
        } else {
            blk.believed_skr = sum_bel / static_cast<double>(m);
            blk.true_skr = sum_tru / static_cast<double>(m);
        }
        rep.per_block.push_back(blk);
    }

    // Summaries over the unsaturated per-second series.
    std::vector<double> va, av, pv, bv, tv, bb, bt;
    for (const auto& s : rep.per_second) {
        av.push_back(s.alpha_db);
        pv.push_back(s.output_power_dbm);
        if (s.saturated) continue;
        va.push_back(s.actual_va_snu);
        bv.push_back(s.believed_skr);
        tv.push_back(s.true_skr);
    }
    for (const auto& b : rep.per_block) {
        bb.push_back(b.believed_skr);
        bt.push_back(b.true_skr);
    }
    rep.alpha_db = summarize(av);
    rep.output_power_dbm = summarize(pv);
    rep.actual_va_snu = summarize(va);
    rep.believed_skr = summarize(bv);
    rep.true_skr = summarize(tv);
    rep.block_believed_skr = summarize(bb);
    rep.block_true_skr = summarize(bt);
    return rep;
}

inline ScenarioReport run_scenario(const ScenarioConfig& config) {
    return run_scenario(config, calibrate_chip());
}

struct ComparisonReport {
    ScenarioReport a;
    ScenarioReport b;
    double alpha_std_ratio = 0.0;          // b/a, per-second attenuation spread
    double skr_std_ratio = 0.0;            // b/a, per-second believed rate spread
    double block_skr_std_ratio = 0.0;      // b/a, block believed rate spread
    double overestimation_ratio_a = 0.0;   // believed mean / true mean
    double overestimation_ratio_b = 0.0;
    std::vector<double> per_second_alpha_delta;  // b - a
    std::vector<double> per_block_skr_delta;     // b - a, believed
};

// Paired comparison on one shared disturbance trace. The second scenario
// must reference the first and carry the same seed; its makeup loss levels
// to the first run's realized mean attenuation.
inline ComparisonReport compare_designs(const ScenarioConfig& cfg_a, const ScenarioConfig& cfg_b,
                                        const ChipModel& chip) {
    if (!cfg_b.shared_trace_with || *cfg_b.shared_trace_with != cfg_a.id)
        throw NumericalError("trace mismatch: second scenario does not reference the first");
    if (cfg_b.seed != cfg_a.seed)
        throw NumericalError("trace mismatch: scenarios must share one seed");

    ComparisonReport cmp;
    ScenarioConfig a = cfg_a;
    a.noise = resolve_noise(cfg_a, chip);
    cmp.a = run_scenario(a, chip);

    ScenarioConfig b = cfg_b;
    b.noise = cmp.a.noise_used;
    if (b.variant == VoaVariant::SymmetricSingle && !b.power_anchor_mean_alpha_db)
        b.power_anchor_mean_alpha_db = cmp.a.alpha_db.mean;
    cmp.b = run_scenario(b, chip);

    // Fairness check: both designs consumed the identical stage-0 trace.
    for (std::size_t k = 0; k < cmp.a.per_second.size(); ++k) {
        if (cmp.a.per_second[k].delta1_rad != cmp.b.per_second[k].delta1_rad)
            throw NumericalError("trace mismatch: shared trace differs sample-for-sample");
    }

    cmp.alpha_std_ratio = cmp.b.alpha_db.std / cmp.a.alpha_db.std;
    cmp.skr_std_ratio = cmp.b.believed_skr.std / cmp.a.believed_skr.std;
    cmp.block_skr_std_ratio = cmp.b.block_believed_skr.std / cmp.a.block_believed_skr.std;
    cmp.overestimation_ratio_a = cmp.a.believed_skr.mean / cmp.a.true_skr.mean;
    cmp.overestimation_ratio_b = cmp.b.believed_skr.mean / cmp.b.true_skr.mean;
    cmp.per_second_alpha_delta.reserve(cmp.a.per_second.size());
    for (std::size_t k = 0; k < cmp.a.per_second.size(); ++k)
        cmp.per_second_alpha_delta.push_back(cmp.b.per_second[k].alpha_db -
                                             cmp.a.per_second[k].alpha_db);
    for (std::size_t k = 0; k < cmp.a.per_block.size(); ++k)
        cmp.per_block_skr_delta.push_back(cmp.b.per_block[k].believed_skr -
                                          cmp.a.per_block[k].believed_skr);
    return cmp;
}

struct CurveSweep {
    std::vector<double> delta_phi;                          // [0, 2pi] grid
    std::vector<double> eta_bias;                           // one column per value
    std::vector<std::vector<AttenuationSample>> columns;    // columns[j][i]
};

inline CurveSweep sweep_attenuation_curves(const std::vector<double>& eta_bias_list,
                                           std::size_t grid_size) {
    if (grid_size < 100) throw NumericalError("curve sweep grid must have >= 100 points");
    for (double e : eta_bias_list)
        if (!(e > 0.0 && e <= 1.0)) throw ConfigError("eta-bias must be in (0,1]");
    CurveSweep sweep;
    sweep.eta_bias = eta_bias_list;
    sweep.delta_phi.resize(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i)
        sweep.delta_phi[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(grid_size - 1);
    for (double e : eta_bias_list) {
        const AttenuationCurve curve(0.5, e);
        std::vector<AttenuationSample> col(grid_size);
        for (std::size_t i = 0; i < grid_size; ++i) col[i] = curve.attenuation_db(sweep.delta_phi[i]);
        sweep.columns.push_back(std::move(col));
    }
    return sweep;
}

struct VoltageGrid {
    double min_v = 0.0;
    double max_v = 12.0;
    double step_v = 0.1;

    std::vector<double> points() const {
        if (!(step_v > 0.0) || max_v < min_v) throw ConfigError("invalid voltage grid");
        std::vector<double> p;
        for (double u = min_v; u <= max_v + 1e-9; u += step_v) p.push_back(u);
        return p;
    }
};

struct VoltageMap {
    std::vector<double> u1, u2;
    std::vector<std::vector<AttenuationSample>> alpha;  // [i1][i2]
    double argmax_u1 = 0.0, argmax_u2 = 0.0, max_alpha_db = 0.0;
};

inline VoltageMap sweep_voltage_map(const ChipModel& chip, const VoltageGrid& g1,
                                    const VoltageGrid& g2) {
    VoltageMap map;
    map.u1 = g1.points();
    map.u2 = g2.points();
    map.alpha.resize(map.u1.size());
    map.max_alpha_db = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < map.u1.size(); ++i) {
        map.alpha[i].resize(map.u2.size());
        for (std::size_t j = 0; j < map.u2.size(); ++j) {
            const AttenuationSample a = chip.attenuation_db(map.u1[i], map.u2[j]);
            map.alpha[i][j] = a;
            if (a.alpha_db > map.max_alpha_db) {
                map.max_alpha_db = a.alpha_db;
                map.argmax_u1 = map.u1[i];
                map.argmax_u2 = map.u2[j];
            }
        }
    }
    return map;
}

struct TradeoffRow {
    double eta_bias = 0.0;
    double alpha_min_db = 0.0;       // one stage at dphi = 0
    double alpha_max_db = 0.0;       // one stage at dphi = pi (clamped if saturated)
    bool max_saturated = false;
    double design_alpha_db = 0.0;    // operating point the flatness is judged at
    double max_deviation_db = 0.0;   // fluctuation range at the design point
    int stages_needed = 0;           // to reach the target on top of coupler loss
};

// Design-tradeoff table: adjustable range, flatness at the deepest usable
// operating point, and the stage count required for a target attenuation.
// Curves are judged at their own extremum, capped at a common comparison
// level so the nearly-extinguished symmetric device is rated at a finite
// target like every other row (default: the half-bias stage extremum).
inline std::vector<TradeoffRow> bias_tradeoff_sweep(const std::vector<double>& eta_bias_grid,
                                                    double alpha_target_db, double delta_max,
                                                    double coupler_loss_db = 8.0,
                                                    std::optional<double> comparison_alpha_db =
                                                        std::nullopt) {
    const double comparison =
        comparison_alpha_db.value_or(AttenuationCurve(0.5, 0.5).max_alpha_db().alpha_db);
    std::vector<TradeoffRow> rows;
    for (double e : eta_bias_grid) {
        if (!(e > 0.0 && e <= 1.0)) throw ConfigError("eta-bias must be in (0,1]");
        const AttenuationCurve curve(0.5, e);
        TradeoffRow row;
        row.eta_bias = e;
        row.alpha_min_db = curve.min_alpha_db();
        const AttenuationSample mx = curve.max_alpha_db();
        row.alpha_max_db = mx.alpha_db;
        row.max_saturated = mx.saturated;
        row.design_alpha_db = mx.saturated ? comparison : std::min(mx.alpha_db, comparison);
        const double dphi0 = solve_operating_point(curve, row.design_alpha_db, Branch::Rising);
        row.max_deviation_db = max_attenuation_deviation(curve, dphi0, delta_max).max_deviation_db;
        const double needed = alpha_target_db - coupler_loss_db;
        if (needed <= 0.0)
            row.stages_needed = 0;
        else if (mx.saturated)
            row.stages_needed = 1;
        else
            row.stages_needed = static_cast<int>(std::ceil(needed / mx.alpha_db - 1e-12));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace qkdvoa

#endif
