// Acceptance suite: runs every promised behavior at its stated tolerance and
// prints one pass/fail line per criterion. Exits nonzero if any fails.
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qkdvoa/cli.hpp"
#include "qkdvoa/harness.hpp"

using namespace qkdvoa;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& label, const std::string& detail) {
    std::printf("[%s] criterion %d: %s  (%s)\n", ok ? "PASS" : "FAIL", criterion, label.c_str(),
                detail.c_str());
    if (!ok) ++g_failures;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

struct SeedOutcome {
    double alpha_ratio = 0.0;
    double block_skr_ratio = 0.0;
    double biased_alpha_std = 0.0;
    double biased_believed_mean = 0.0;
    double sym_believed_mean = 0.0;
    double sym_true_mean = 0.0;
};

}  // namespace

int main() {
    const ChipModel chip = calibrate_chip();

    // ---- 1. analytic attenuation anchors ----
    {
        const AttenuationCurve biased(0.5, 0.5);
        const double a_pi = biased.attenuation_db(kPi).alpha_db;
        const double a_0 = biased.attenuation_db(0.0).alpha_db;
        report(1, std::fabs(a_pi - 16.69) <= 0.01 && std::fabs(a_0 - 1.38) <= 0.01,
               "biased-curve extremum and minimum",
               fmt("alpha(pi) = %.4f dB vs 16.69 +- 0.01; alpha(0) = %.4f dB vs 1.38 +- 0.01",
                   a_pi, a_0));
    }

    // ---- 2. sensitivity comparison at the paper's fluctuation range ----
    {
        const double delta_max = 0.016 * kPi;
        const AttenuationCurve biased(0.5, 0.5);
        const double dev_biased =
            max_attenuation_deviation(biased, kPi, delta_max).max_deviation_db;

        // Independent brute force for the symmetric device at the same target:
        // direct formula evaluation on a dense grid around the solved point.
        const double alpha0 = 16.69;
        const double phi0 = std::acos(2.0 * std::pow(10.0, -alpha0 / 10.0) - 1.0);
        double lo = 1e9, hi = -1e9;
        const int n = 200001;
        for (int i = 0; i < n; ++i) {
            const double phi = phi0 - delta_max + 2.0 * delta_max * i / (n - 1);
            const double a = std::fabs(10.0 * std::log10(0.5 * (1.0 + std::cos(phi))));
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
        const double dev_sym = std::max(alpha0 - lo, hi - alpha0);

        const bool ok = std::fabs(dev_biased - 0.09) <= 0.005 && dev_sym >= 1.30 &&
                        dev_sym <= 1.70 && dev_sym >= 10.0 * dev_biased;
        report(2, ok, "fluctuation range, biased vs symmetric",
               fmt("biased %.4f dB vs 0.09 +- 0.005; symmetric brute force %.4f dB in "
                   "[1.30, 1.70], ratio %.1fx >= 10x",
                   dev_biased, dev_sym, dev_sym / dev_biased));
    }

    // ---- 3. chip calibration consistency ----
    {
        const double at_max = chip.attenuation_db(11.0, 5.5).alpha_db;
        const double at_min = chip.attenuation_db(6.7, 11.1).alpha_db;
        report(3, std::fabs(at_max - 39.14) <= 0.1 && std::fabs(at_min - 12.73) <= 0.1,
               "calibrated chip reproduces both anchors",
               fmt("alpha(11, 5.5) = %.3f dB vs 39.14 +- 0.1; alpha(6.7, 11.1) = %.3f dB vs "
                   "12.73 +- 0.1",
                   at_max, at_min));
    }

    // ---- 4. closed-form Holevo bound against the covariance oracle ----
    {
        const CounterRng rng(424242, 0);
        double worst = 0.0;
        bool nonneg = true;
        int cases = 0;
        for (std::uint64_t i = 0; i < 1000; ++i) {
            QKDParams p;
            p.modulation_variance_snu = 1.0 + 9.0 * rng.uniform(i, 0);
            p.transmittance = 0.01 + 0.99 * rng.uniform(i, 1);
            p.excess_noise_snu = 0.2 * rng.uniform(i, 2);
            p.detector_efficiency = 0.3 + 0.699 * rng.uniform(i, 3);
            p.electronic_noise_snu = 0.3 * rng.uniform(i, 4);
            const HolevoBound closed = holevo_bound(p);
            const auto oracle = oracles::channel_state_oracle(
                p.modulation_variance_snu, *p.transmittance, p.excess_noise_snu,
                p.detector_efficiency, p.electronic_noise_snu);
            worst = std::max(worst,
                             std::fabs(closed.lambdas[0] - oracle.shared_state_lambdas[0]));
            worst = std::max(worst,
                             std::fabs(closed.lambdas[1] - oracle.shared_state_lambdas[1]));
            worst = std::max(worst,
                             std::fabs(closed.lambdas[2] - oracle.conditional_lambdas[0]));
            worst = std::max(worst,
                             std::fabs(closed.lambdas[3] - oracle.conditional_lambdas[1]));
            nonneg = nonneg && closed.bits >= -1e-12;
            ++cases;
        }
        QKDParams p30;
        p30.distance_km = 30.0;
        const double chi30 = holevo_bound(p30).bits;
        report(4,
               cases == 1000 && worst < 1e-9 && nonneg && std::fabs(chi30 - 0.2818) <= 0.005,
               "symplectic eigenvalues match the numeric oracle",
               fmt("worst |closed - oracle| = %.2e over 1000 draws (< 1e-9); chi at 30 km = "
                   "%.4f vs 0.2818 +- 0.005",
                   worst, chi30));
    }

    // ---- 5. secret-key-rate targets ----
    {
        QKDParams p30;
        p30.distance_km = 30.0;
        QKDParams p60;
        p60.distance_km = 60.0;
        const double k30_asym = secret_key_rate(p30, SkrMode::Asymptotic).raw_key_rate;
        const double k30_fs = secret_key_rate(p30, SkrMode::FiniteSize).raw_key_rate;
        const double k60_fs = secret_key_rate(p60, SkrMode::FiniteSize).raw_key_rate;
        const double resid30 = (k30_fs - 1.88e-2) / 1.88e-2;
        const double resid60 = (k60_fs - 1.97e-3) / 1.97e-3;
        std::printf("       finite-size values: K(30 km) = %.6e (target 1.88e-2, residual "
                    "%+.2f%%), K(60 km) = %.6e (target 1.97e-3, residual %+.2f%%)\n",
                    k30_fs, 100.0 * resid30, k60_fs, 100.0 * resid60);
        const bool ok = std::fabs(k30_asym - 0.0419) <= 0.002 && std::fabs(resid30) <= 0.05 &&
                        std::fabs(resid60) <= 0.25;
        report(5, ok, "asymptotic and finite-size rate targets",
               fmt("asymptotic K(30 km) = %.5f vs 0.0419 +- 0.002; finite-size residuals "
                   "%+.2f%% (|.| <= 5%%) and %+.2f%% (|.| <= 25%%)",
                   k30_asym, 100.0 * resid30, 100.0 * resid60));
    }

    // ---- 6 & 7. stability experiment over the fixed 20-seed suite ----
    {
        const double stage_db = 0.5 * (38.24 - chip.fixed_loss_db());
        const double phi_op =
            solve_operating_point(chip.stage(0).curve, stage_db, Branch::Rising);
        const NoiseCalibration cal =
            calibrate_noise_to_std(0.071, chip, {phi_op, phi_op});

        std::vector<SeedOutcome> outcomes;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            ScenarioConfig biased;
            biased.id = "biased";
            biased.variant = VoaVariant::BiasedCascade;
            biased.distance_km = 60.0;
            biased.seed = seed;
            biased.noise = cal.config;

            ScenarioConfig sym = biased;
            sym.id = "symmetric";
            sym.variant = VoaVariant::SymmetricSingle;
            sym.shared_trace_with = biased.id;

            const ComparisonReport cmp = compare_designs(biased, sym, chip);
            SeedOutcome o;
            o.alpha_ratio = cmp.alpha_std_ratio;
            o.block_skr_ratio = cmp.block_skr_std_ratio;
            o.biased_alpha_std = cmp.a.alpha_db.std;
            o.biased_believed_mean = cmp.a.believed_skr.mean;
            o.sym_believed_mean = cmp.b.believed_skr.mean;
            o.sym_true_mean = cmp.b.true_skr.mean;
            outcomes.push_back(o);
        }

        double mean_alpha_std = 0.0;
        int alpha_wins = 0, skr_wins = 0;
        for (const auto& o : outcomes) {
            mean_alpha_std += o.biased_alpha_std;
            if (o.alpha_ratio >= 5.0) ++alpha_wins;
            if (o.block_skr_ratio >= 5.0) ++skr_wins;
        }
        mean_alpha_std /= static_cast<double>(outcomes.size());

        const bool cal_ok = std::fabs(mean_alpha_std - 0.071) <= 0.0035;
        report(6, cal_ok && alpha_wins >= 18 && skr_wins >= 18,
               "stability statistics over 20 seeds",
               fmt("biased alpha std mean %.4f dB vs 0.071 +- 0.0035; alpha-std ratio >= 5x in "
                   "%.0f/20; block-SKR-std ratio >= 5x in %.0f/20",
                   mean_alpha_std, static_cast<double>(alpha_wins),
                   static_cast<double>(skr_wins)));

        QKDParams p60;
        p60.distance_km = 60.0;
        const double target60 = secret_key_rate(p60, SkrMode::FiniteSize).raw_key_rate;
        int direction_wins = 0;
        double biased_grand = 0.0;
        for (const auto& o : outcomes) {
            if (o.sym_believed_mean > o.sym_true_mean) ++direction_wins;
            biased_grand += o.biased_believed_mean;
        }
        biased_grand /= static_cast<double>(outcomes.size());
        const double biased_dev = (biased_grand - target60) / target60;
        std::printf("       60 km targets: engine %.6e, published reference 1.97e-3; biased "
                    "believed suite mean %.6e; symmetric believed/true mean ratio %.3f "
                    "(published symmetric mean 3.95e-3 is not reproduced; see notes)\n",
                    target60, biased_grand,
                    outcomes.back().sym_believed_mean / outcomes.back().sym_true_mean);
        report(7, direction_wins == 20 && std::fabs(biased_dev) <= 0.01,
               "one-time-calibration overestimation direction",
               fmt("symmetric believed mean > true mean on %.0f/20 seeds; biased believed "
                   "suite mean within %+.3f%% of the 60 km target (|.| <= 1%%)",
                   static_cast<double>(direction_wins), 100.0 * biased_dev));
    }

    // ---- 8. always-on property suites ----
    {
        bool ok = true;
        std::string failed;

        // Evenness and periodicity.
        {
            const AttenuationCurve c(0.5, 0.5);
            for (int i = 0; i <= 500 && ok; ++i) {
                const double x = kTwoPi * i / 500.0;
                if (std::fabs(c.attenuation_db(x).alpha_db -
                              c.attenuation_db(kTwoPi - x).alpha_db) > 1e-10) {
                    ok = false;
                    failed = "evenness";
                }
            }
        }
        // Monotone on [0, pi] and passive.
        {
            const AttenuationCurve c(0.5, 0.7);
            double prev = -1.0;
            for (int i = 0; i <= 1000 && ok; ++i) {
                const double x = kPi * i / 1000.0;
                const double a = c.attenuation_db(x).alpha_db;
                if (a < prev - 1e-12 || c.linear_transmittance(x) > 1.0 + 1e-12) {
                    ok = false;
                    failed = "monotonicity/passivity";
                }
                prev = a;
            }
        }
        // Unit bias coefficient reduces to the symmetric form.
        {
            const AttenuationCurve sym(0.5, 1.0);
            for (int i = 0; i <= 1000 && ok; ++i) {
                const double x = kTwoPi * i / 1000.0;
                if (std::fabs(sym.linear_transmittance(x) - 0.5 * (1.0 + std::cos(x))) > 1e-12) {
                    ok = false;
                    failed = "symmetric reduction";
                }
            }
        }
        // Inversion round-trip.
        {
            const AttenuationCurve c(0.5, 0.5);
            const double phi0 = solve_operating_point(c, 12.0);
            const CounterRng rng(515151, 0);
            std::vector<double> delta, alpha;
            for (std::uint64_t i = 0; i < 100; ++i) {
                const double d = (rng.uniform(i, 0) - 0.5) * 0.08 * kPi;
                if (phi0 + d >= kPi) continue;
                delta.push_back(d);
                alpha.push_back(c.attenuation_db(phi0 + d).alpha_db);
            }
            const auto back = invert_attenuation_to_phase(alpha, c, phi0, Branch::Rising);
            for (std::size_t i = 0; i < back.size() && ok; ++i) {
                if (std::fabs(back[i] - delta[i]) > 1e-9) {
                    ok = false;
                    failed = "inversion round-trip";
                }
            }
        }
        // Rate monotonicities.
        {
            QKDParams base;
            base.distance_km = 30.0;
            const double k0 = secret_key_rate(base).raw_key_rate;
            QKDParams p = base;
            p.excess_noise_snu = 0.07;
            const bool m1 = secret_key_rate(p).raw_key_rate < k0;
            p = base;
            p.reconciliation_efficiency = 0.98;
            const bool m2 = secret_key_rate(p).raw_key_rate > k0;
            p = base;
            p.detector_efficiency = 0.7;
            const bool m3 = secret_key_rate(p).raw_key_rate > k0;
            if (!(m1 && m2 && m3)) {
                ok = false;
                failed = "rate monotonicity";
            }
        }
        // Smoothness of the rate in the modulation variance.
        {
            const auto rate_at = [](double va) {
                QKDParams p;
                p.distance_km = 30.0;
                p.modulation_variance_snu = va;
                return secret_key_rate(p, SkrMode::FiniteSize).raw_key_rate;
            };
            const double d1 = oracles::central_difference(rate_at, 4.4, 1e-5);
            const double d2 = oracles::richardson_derivative(rate_at, 4.4, 1e-5);
            if (std::fabs(d1 - d2) > 1e-4 * std::fabs(d2)) {
                ok = false;
                failed = "rate smoothness";
            }
        }
        // Determinism of a seeded scenario.
        {
            ScenarioConfig cfg;
            cfg.distance_km = 60.0;
            cfg.duration_sec = 600.0;
            cfg.block_sec = 75.0;
            cfg.seed = 12345;
            PhaseNoiseConfig n;
            n.slow_sigma_rad = 0.006;
            n.fast_sigma_rad = 0.003;
            cfg.noise = n;
            const ScenarioReport r1 = run_scenario(cfg, chip);
            const ScenarioReport r2 = run_scenario(cfg, chip);
            for (std::size_t k = 0; k < r1.per_second.size() && ok; ++k) {
                if (r1.per_second[k].believed_skr != r2.per_second[k].believed_skr) {
                    ok = false;
                    failed = "determinism";
                }
            }
        }
        report(8, ok, "property suites",
               ok ? "evenness, monotonicity, passivity, symmetric reduction, inversion, rate "
                    "monotonicity, smoothness, determinism all green"
                  : "first failing property: " + failed);
    }

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
