#ifndef QKDVOA_NOISE_HPP
#define QKDVOA_NOISE_HPP

#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "qkdvoa/drive.hpp"
#include "qkdvoa/photonic.hpp"
#include "qkdvoa/rng.hpp"

namespace qkdvoa {

// Two-component phase disturbance: an Ornstein-Uhlenbeck slow drift
// (environmental temperature) plus white Gaussian fast noise (electrical
// drive). All sigmas are stationary standard deviations in radians.
struct PhaseNoiseConfig {
    double slow_sigma_rad = 0.0;
    double slow_tau_sec = 300.0;
    double fast_sigma_rad = 0.0;
    double sample_rate_hz = 1.0;
    double duration_sec = 4800.0;

    void validate() const {
        if (!(slow_sigma_rad >= 0.0) || !(fast_sigma_rad >= 0.0))
            throw NumericalError("noise sigmas must be >= 0");
        if (!(slow_tau_sec > 0.0)) throw NumericalError("slow tau must be > 0");
        if (!(sample_rate_hz > 0.0)) throw NumericalError("sample rate must be > 0");
        const double n = duration_sec * sample_rate_hz;
        if (!(n >= 1.0) || std::fabs(n - std::round(n)) > 1e-9)
            throw NumericalError("duration * sample rate must be a positive integer");
    }

    std::size_t sample_count() const {
        return static_cast<std::size_t>(std::llround(duration_sec * sample_rate_hz));
    }
};

struct PhaseNoiseTrace {
    std::vector<double> samples;  // delta(t), radians
    std::uint64_t seed = 0;
    std::uint32_t stage_id = 0;
    PhaseNoiseConfig config;
};

// Exact OU discretization: x_{k+1} = rho x_k + sigma sqrt(1-rho^2) xi_k with
// rho = exp(-dt/tau) and stationary initial sample. The generator stream is
// keyed by (seed, stage_id); the k-th sample draws lanes (0, 1) at counter k,
// so regeneration is bit-identical and order-independent.
inline PhaseNoiseTrace simulate_phase_noise(const PhaseNoiseConfig& cfg, std::uint64_t seed,
                                            std::uint32_t stage_id = 0) {
    cfg.validate();
    const std::size_t n = cfg.sample_count();
    const CounterRng rng(seed, stage_id);
    const double dt = 1.0 / cfg.sample_rate_hz;
    const double rho = std::exp(-dt / cfg.slow_tau_sec);
    const double innov = cfg.slow_sigma_rad * std::sqrt(1.0 - rho * rho);

    PhaseNoiseTrace trace;
    trace.samples.resize(n);
    trace.seed = seed;
    trace.stage_id = stage_id;
    trace.config = cfg;

    double x = cfg.slow_sigma_rad * rng.normal(0, 0);
    trace.samples[0] = x + cfg.fast_sigma_rad * rng.normal(0, 1);
    for (std::size_t k = 1; k < n; ++k) {
        x = rho * x + innov * rng.normal(k, 0);
        trace.samples[k] = x + cfg.fast_sigma_rad * rng.normal(k, 1);
    }
    return trace;
}

// Operating phases of the two chip stages used while matching the measured
// attenuation spread.
struct ChipOperatingPoint {
    double dphi1 = kPi;
    double dphi2 = kPi;
};

struct NoiseCalibration {
    PhaseNoiseConfig config;
    double achieved_alpha_std_db = 0.0;
    int iterations = 0;
};

namespace detail {

inline double chip_alpha_std_db(const ChipModel& chip, const ChipOperatingPoint& op,
                                const PhaseNoiseConfig& cfg, std::uint64_t seed) {
    const PhaseNoiseTrace t0 = simulate_phase_noise(cfg, seed, 0);
    const PhaseNoiseTrace t1 = simulate_phase_noise(cfg, seed, 1);
    const std::size_t n = t0.samples.size();
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double a = chip.attenuation_at_phases(op.dphi1 + t0.samples[k],
                                                    op.dphi2 + t1.samples[k]).alpha_db;
        sum += a;
        sum2 += a * a;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = (sum2 - static_cast<double>(n) * mean * mean) /
                       static_cast<double>(n - 1);
    return std::sqrt(std::max(var, 0.0));
}

}  // namespace detail

// Scale a reference process (tau = 300 s, fast:slow variance 1:4) by a common
// multiplier until the simulated chip attenuation spread matches the target,
// averaged over the seed set. Bisection in the log of the multiplier.
inline NoiseCalibration calibrate_noise_to_std(double target_alpha_std_db, const ChipModel& chip,
                                               const ChipOperatingPoint& op,
                                               const std::vector<std::uint64_t>& seeds = {101, 102,
                                                                                          103, 104,
                                                                                          105, 106,
                                                                                          107, 108,
                                                                                          109, 110},
                                               double duration_sec = 4800.0,
                                               double sample_rate_hz = 1.0) {
    if (!(target_alpha_std_db > 0.0))
        throw CalibrationError("target attenuation std must be > 0 dB");
    if (seeds.size() < 10)
        throw CalibrationError("noise calibration needs at least 10 seeds");

    const auto config_for = [&](double total_sigma) {
        PhaseNoiseConfig cfg;
        cfg.slow_sigma_rad = 2.0 * total_sigma / std::sqrt(5.0);  // 4:1 variance split
        cfg.fast_sigma_rad = total_sigma / std::sqrt(5.0);
        cfg.slow_tau_sec = 300.0;
        cfg.sample_rate_hz = sample_rate_hz;
        cfg.duration_sec = duration_sec;
        return cfg;
    };
    const auto mean_std = [&](double total_sigma) {
        const PhaseNoiseConfig cfg = config_for(total_sigma);
        double acc = 0.0;
        for (const std::uint64_t s : seeds) acc += detail::chip_alpha_std_db(chip, op, cfg, s);
        return acc / static_cast<double>(seeds.size());
    };

    double lo = 1e-6, hi = 0.3;  // radians of total phase std
    if (mean_std(hi) < target_alpha_std_db)
        throw CalibrationError("target attenuation std unreachable within phase-noise bracket");

    int iterations = 0;
    double sigma = 0.0, achieved = 0.0;
    for (; iterations < 60; ++iterations) {
        sigma = std::sqrt(lo * hi);
        achieved = mean_std(sigma);
        if (std::fabs(achieved - target_alpha_std_db) <= 0.05 * target_alpha_std_db) break;
        if (achieved < target_alpha_std_db)
            lo = sigma;
        else
            hi = sigma;
    }
    if (std::fabs(achieved - target_alpha_std_db) > 0.05 * target_alpha_std_db)
        throw CalibrationError("noise calibration did not converge in 60 bisection steps");

    NoiseCalibration out;
    out.config = config_for(sigma);
    out.achieved_alpha_std_db = achieved;
    out.iterations = iterations + 1;
    return out;
}

// Per-sample inversion of an attenuation series back to phase deviations
// around dphi0, on the chosen monotone branch. Mirrors how a measured series
// from one device is ported onto a different curve.
inline std::vector<double> invert_attenuation_to_phase(const std::vector<double>& alpha_series_db,
                                                       const AttenuationCurve& curve, double dphi0,
                                                       Branch branch) {
    std::vector<double> delta;
    delta.reserve(alpha_series_db.size());
    for (std::size_t i = 0; i < alpha_series_db.size(); ++i) {
        double phi;
        try {
            phi = solve_operating_point(curve, alpha_series_db[i], branch);
        } catch (const NumericalError& e) {
            std::ostringstream msg;
            msg << "sample " << i << ": " << e.what();
            throw NumericalError(msg.str());
        }
        delta.push_back(phi - dphi0);
    }
    return delta;
}

}  // namespace qkdvoa

#endif
