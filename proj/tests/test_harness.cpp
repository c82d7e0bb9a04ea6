#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "qkdvoa/harness.hpp"

using namespace qkdvoa;
using Catch::Approx;

namespace {

const ChipModel& test_chip() {
    static const ChipModel chip = calibrate_chip();
    return chip;
}

PhaseNoiseConfig small_noise() {
    PhaseNoiseConfig n;
    n.slow_sigma_rad = 0.006;
    n.fast_sigma_rad = 0.003;
    n.slow_tau_sec = 300.0;
    return n;
}

ScenarioConfig biased_config(std::uint64_t seed, double duration = 600.0, double block = 75.0) {
    ScenarioConfig cfg;
    cfg.id = "biased";
    cfg.variant = VoaVariant::BiasedCascade;
    cfg.distance_km = 60.0;
    cfg.duration_sec = duration;
    cfg.block_sec = block;
    cfg.seed = seed;
    cfg.noise = small_noise();
    return cfg;
}

ScenarioConfig symmetric_partner(const ScenarioConfig& a) {
    ScenarioConfig cfg = a;
    cfg.id = a.id + "_symmetric";
    cfg.variant = VoaVariant::SymmetricSingle;
    cfg.shared_trace_with = a.id;
    return cfg;
}

}  // namespace

TEST_CASE("summary statistics") {
    const SummaryStats s = summarize({1.0, 2.0, 3.0});
    CHECK(s.mean == Approx(2.0));
    CHECK(s.std == Approx(1.0));
    CHECK(s.min == 1.0);
    CHECK(s.max == 3.0);

    const SummaryStats c = summarize({5.0, 5.0, 5.0, 5.0});
    CHECK(c.std == 0.0);

    CHECK_THROWS_AS(summarize({}), NumericalError);
    CHECK_THROWS_AS(summarize({1.0}), NumericalError);
}

TEST_CASE("attenuation curve sweep") {
    const CurveSweep sweep = sweep_attenuation_curves({1.0, 0.75, 0.5, 0.25}, 401);
    REQUIRE(sweep.columns.size() == 4);
    REQUIRE(sweep.delta_phi.size() == 401);

    // Depth ordering at dphi = pi: the symmetric curve is deepest.
    const std::size_t mid = 200;  // exactly pi on the 401-point grid
    CHECK(sweep.delta_phi[mid] == Approx(kPi));
    CHECK(sweep.columns[0][mid].saturated);
    CHECK(sweep.columns[0][mid].alpha_db > sweep.columns[1][mid].alpha_db);
    CHECK(sweep.columns[1][mid].alpha_db > sweep.columns[2][mid].alpha_db);
    CHECK(sweep.columns[2][mid].alpha_db > sweep.columns[3][mid].alpha_db);
    CHECK(sweep.columns[2][mid].alpha_db == Approx(16.69).margin(0.01));
    CHECK(sweep.columns[3][mid].alpha_db == Approx(12.041199826559248).epsilon(1e-9));

    CHECK_THROWS_AS(sweep_attenuation_curves({1.5}, 401), ConfigError);
    CHECK_THROWS_AS(sweep_attenuation_curves({0.5}, 50), NumericalError);
}

TEST_CASE("voltage map locates the published extrema") {
    const VoltageMap map = sweep_voltage_map(test_chip(), {0.0, 12.0, 0.1}, {0.0, 12.0, 0.1});
    CHECK(map.argmax_u1 == Approx(11.0).margin(1e-9));
    CHECK(map.argmax_u2 == Approx(5.5).margin(1e-9));
    CHECK(map.max_alpha_db == Approx(39.14).margin(0.1));

    const auto at = [&](double u1, double u2) {
        const std::size_t i = static_cast<std::size_t>(std::llround(u1 / 0.1));
        const std::size_t j = static_cast<std::size_t>(std::llround(u2 / 0.1));
        return map.alpha[i][j].alpha_db;
    };
    CHECK(at(6.7, 11.1) == Approx(12.73).margin(0.1));
}

TEST_CASE("bias tradeoff table") {
    const auto rows = bias_tradeoff_sweep({0.25, 0.5, 1.0}, 38.0, 0.016 * kPi);
    REQUIRE(rows.size() == 3);

    const TradeoffRow& quarter = rows[0];
    CHECK(quarter.alpha_max_db == Approx(12.041199826559248).epsilon(1e-9));
    CHECK(quarter.stages_needed == 3);

    const TradeoffRow& half = rows[1];
    CHECK(half.alpha_max_db == Approx(16.69).margin(0.01));
    CHECK(half.max_deviation_db == Approx(0.09).margin(0.005));
    CHECK(half.stages_needed == 2);  // 2 stages + 8 dB couplers cover ~38 dB

    const TradeoffRow& sym = rows[2];
    CHECK(sym.max_saturated);
    CHECK(sym.design_alpha_db == Approx(16.69).margin(0.01));
    CHECK(sym.max_deviation_db > 1.3);
    CHECK(sym.max_deviation_db < 1.7);
    CHECK(sym.max_deviation_db > 10.0 * half.max_deviation_db);
    CHECK(sym.stages_needed == 1);

    // The flatness column grows monotonically with the bias coefficient.
    std::vector<double> grid;
    for (double e = 0.3; e <= 1.0001; e += 0.05) grid.push_back(std::min(e, 1.0));
    const auto fine = bias_tradeoff_sweep(grid, 38.0, 0.016 * kPi);
    for (std::size_t i = 1; i < fine.size(); ++i)
        CHECK(fine[i].max_deviation_db > fine[i - 1].max_deviation_db);
}

TEST_CASE("zero-noise scenario is flat at the target power") {
    ScenarioConfig cfg = biased_config(1);
    PhaseNoiseConfig quiet;
    quiet.slow_sigma_rad = 0.0;
    quiet.fast_sigma_rad = 0.0;
    cfg.noise = quiet;

    const ScenarioReport rep = run_scenario(cfg, test_chip());
    // Output power sits at the reference up to the drive quantization offset.
    CHECK(rep.output_power_dbm.mean == Approx(-65.50).margin(0.01));
    CHECK(rep.output_power_dbm.std == 0.0);
    CHECK(rep.alpha_db.std == 0.0);
    CHECK(rep.block_believed_skr.std == 0.0);
    CHECK(rep.block_true_skr.std == 0.0);
    for (std::size_t b = 1; b < rep.per_block.size(); ++b)
        CHECK(rep.per_block[b].believed_skr == rep.per_block[0].believed_skr);
    CHECK(rep.believed_skr.mean == Approx(rep.target_skr).epsilon(1e-3));
}

TEST_CASE("default scenario block structure") {
    ScenarioConfig cfg = biased_config(3, 4800.0, 600.0);
    CHECK(cfg.block_count() == 8);  // 80 minutes in 10-minute points
    const ScenarioReport rep = run_scenario(cfg, test_chip());
    CHECK(rep.per_block.size() == 8);
    CHECK(rep.per_second.size() == 4800);
}

TEST_CASE("scenario reports are deterministic and self-consistent") {
    const ScenarioConfig cfg = biased_config(17);
    const ScenarioReport a = run_scenario(cfg, test_chip());
    const ScenarioReport b = run_scenario(cfg, test_chip());

    REQUIRE(a.per_second.size() == b.per_second.size());
    for (std::size_t k = 0; k < a.per_second.size(); ++k) {
        CHECK(a.per_second[k].alpha_db == b.per_second[k].alpha_db);
        CHECK(a.per_second[k].believed_skr == b.per_second[k].believed_skr);
        CHECK(a.per_second[k].true_skr == b.per_second[k].true_skr);
    }
    CHECK(a.alpha_db.mean == b.alpha_db.mean);
    CHECK(a.block_believed_skr.std == b.block_believed_skr.std);

    // Summary statistics recompute from the per-second series.
    std::vector<double> alphas, believed;
    for (const auto& s : a.per_second) {
        alphas.push_back(s.alpha_db);
        if (!s.saturated) believed.push_back(s.believed_skr);
    }
    const SummaryStats sa = summarize(alphas);
    CHECK(sa.mean == Approx(a.alpha_db.mean).margin(1e-12));
    CHECK(sa.std == Approx(a.alpha_db.std).margin(1e-12));
    const SummaryStats sb = summarize(believed);
    CHECK(sb.mean == Approx(a.believed_skr.mean).margin(1e-12));
}

TEST_CASE("scenario operating point sits near the stage extrema") {
    const ScenarioReport rep = run_scenario(biased_config(5), test_chip());
    REQUIRE(rep.stage_phase0.size() == 2);
    // 38.24 dB total: each stage detuned slightly below its extremum.
    CHECK(rep.stage_phase0[0] == Approx(kPi - 0.11515).margin(2e-3));
    CHECK(rep.stage_phase0[1] == Approx(kPi - 0.11515).margin(2e-3));
    CHECK(rep.zero_noise_alpha_db == Approx(38.24).margin(0.01));
    REQUIRE(rep.stage_voltage.size() == 2);
    // Voltages land on the 1 mV drive grid.
    for (double u : rep.stage_voltage)
        CHECK(u == Approx(0.001 * std::llround(u / 0.001)).margin(1e-12));
}

TEST_CASE("symmetric comparator levels its mean power to the anchor") {
    ScenarioConfig cfg = biased_config(9);
    cfg.variant = VoaVariant::SymmetricSingle;
    const ScenarioReport rep = run_scenario(cfg, test_chip());
    REQUIRE(rep.stage_phase0.size() == 1);
    CHECK(rep.stage_phase0[0] == Approx(3.0783365547146499).epsilon(1e-9));
    // Realized mean attenuation equals the default anchor exactly.
    CHECK(rep.alpha_db.mean == Approx(38.24).margin(1e-9));
    CHECK(rep.makeup_loss_db == Approx(8.24).margin(0.2));
}

TEST_CASE("paired comparison shares the trace and favors the biased design") {
    const ScenarioConfig a = biased_config(21, 4800.0, 600.0);
    const ComparisonReport cmp = compare_designs(a, symmetric_partner(a), test_chip());

    // Fairness: identical delta trace sample-for-sample.
    for (std::size_t k = 0; k < cmp.a.per_second.size(); k += 97)
        CHECK(cmp.a.per_second[k].delta1_rad == cmp.b.per_second[k].delta1_rad);

    // Equal-mean comparison: the symmetric leg levels to the biased mean.
    CHECK(cmp.b.alpha_db.mean == Approx(cmp.a.alpha_db.mean).margin(1e-9));

    CHECK(cmp.alpha_std_ratio > 5.0);
    CHECK(cmp.block_skr_std_ratio > 1.0);
    CHECK(cmp.per_second_alpha_delta.size() == cmp.a.per_second.size());
    CHECK(cmp.per_block_skr_delta.size() == cmp.a.per_block.size());
}

TEST_CASE("comparison of a design with itself gives unit ratios") {
    const ScenarioConfig a = biased_config(33);
    ScenarioConfig b = a;
    b.id = "biased_copy";
    b.shared_trace_with = a.id;
    const ComparisonReport cmp = compare_designs(a, b, test_chip());
    CHECK(cmp.alpha_std_ratio == 1.0);
    CHECK(cmp.skr_std_ratio == 1.0);
    CHECK(cmp.block_skr_std_ratio == 1.0);
    CHECK(cmp.overestimation_ratio_a == cmp.overestimation_ratio_b);
}

TEST_CASE("comparison rejects mismatched traces") {
    const ScenarioConfig a = biased_config(41);
    ScenarioConfig b = symmetric_partner(a);
    b.shared_trace_with = "someone_else";
    CHECK_THROWS_WITH(compare_designs(a, b, test_chip()),
                      Catch::Matchers::ContainsSubstring("trace mismatch"));
    ScenarioConfig c = symmetric_partner(a);
    c.seed = a.seed + 1;
    CHECK_THROWS_WITH(compare_designs(a, c, test_chip()),
                      Catch::Matchers::ContainsSubstring("seed"));
}

TEST_CASE("scenario config validation") {
    ScenarioConfig cfg = biased_config(1);
    cfg.block_sec = 70.0;  // 600/70 is not whole
    CHECK_THROWS_AS(cfg.validate(), NumericalError);

    ScenarioConfig cfg2 = biased_config(1);
    cfg2.input_power_dbm = -70.0;  // below the reference output power
    CHECK_THROWS_AS(cfg2.validate(), NumericalError);
}

TEST_CASE("block aggregation switch averages per-second rates instead") {
    ScenarioConfig cfg = biased_config(55);
    cfg.block_aggregation = BlockAggregation::MeanSkr;
    const ScenarioReport rep = run_scenario(cfg, test_chip());
    // First block equals the plain mean of its per-second believed rates.
    double acc = 0.0;
    const std::size_t per_block = rep.per_second.size() / rep.per_block.size();
    for (std::size_t k = 0; k < per_block; ++k) acc += rep.per_second[k].believed_skr;
    CHECK(rep.per_block[0].believed_skr == Approx(acc / per_block).margin(1e-15));
}
