#ifndef QKDVOA_PHOTONIC_HPP
#define QKDVOA_PHOTONIC_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <sstream>
#include <vector>

#include "qkdvoa/common.hpp"

namespace qkdvoa {

// Optical field in amplitude/phase form. Amplitude is the square root of
// linear power (arbitrary units); phase is kept in (-pi, pi].
struct FieldAmplitude {
    double amplitude = 0.0;
    double phase = 0.0;

    FieldAmplitude() = default;
    FieldAmplitude(double amp, double ph) : amplitude(amp), phase(canonical_phase(ph)) {
        if (!(amp >= 0.0)) throw NumericalError("field amplitude must be >= 0");
    }

    double power() const { return amplitude * amplitude; }
};

// Splitter/coupler transmittances and arm phases of a single interferometer.
struct MziParams {
    double eta1 = 0.5, eta2 = 0.5;  // splitter arms
    double eta3 = 0.5, eta4 = 0.5;  // coupler arms
    double phi1 = 0.0, phi2 = 0.0;  // arm phases, radians

    void validate() const {
        for (double e : {eta1, eta2, eta3, eta4}) {
            if (!(e >= 0.0 && e <= 1.0))
                throw NumericalError("MZI transmittance must lie in [0, 1]");
        }
    }

    double delta_phi() const { return canonical_phase(phi1 - phi2); }
};

// Output field of the interferometer: the two arm contributions
// sqrt(eta1*eta3) e^{i phi1} and sqrt(eta2*eta4) e^{i phi2} interfere.
inline FieldAmplitude mzi_output_field(const MziParams& p, const FieldAmplitude& in) {
    p.validate();
    const std::complex<double> arm1 =
        std::polar(std::sqrt(p.eta1 * p.eta3), p.phi1);
    const std::complex<double> arm2 =
        std::polar(std::sqrt(p.eta2 * p.eta4), p.phi2);
    const std::complex<double> c = arm1 + arm2;
    return FieldAmplitude(in.amplitude * std::abs(c),
                          canonical_phase(in.phase + std::arg(c)));
}

// Output power: P_in * (eta1*eta3 + eta2*eta4 + 2 sqrt(eta1 eta2 eta3 eta4) cos dphi).
inline double mzi_output_power(const MziParams& p, double input_power) {
    p.validate();
    if (!(input_power >= 0.0)) throw NumericalError("input power must be >= 0");
    const double cross = 2.0 * std::sqrt(p.eta1 * p.eta2 * p.eta3 * p.eta4);
    return input_power *
           (p.eta1 * p.eta3 + p.eta2 * p.eta4 + cross * std::cos(p.phi1 - p.phi2));
}

// One attenuation sample; `saturated` marks transmittance clamped at the
// extinction floor (the divergent point of the fully symmetric curve).
struct AttenuationSample {
    double alpha_db = 0.0;
    bool saturated = false;
};

// Parametric attenuation curve of one MZI stage:
//   T(dphi) = eta0^2 (1 + eta' + 2 sqrt(eta') cos dphi),   alpha = |10 log10 T| + excess.
// eta' = 1 is the symmetric device; eta' < 1 biases one arm and flattens the
// extremum at dphi = pi. The constructor rejects curves whose peak
// transmittance exceeds unity so that alpha is nondecreasing on [0, pi].
class AttenuationCurve {
public:
    explicit AttenuationCurve(double eta0 = 0.5, double eta_bias = 1.0,
                              double excess_loss_db = 0.0)
        : eta0_(eta0), eta_bias_(eta_bias), excess_loss_db_(excess_loss_db) {
        if (!(eta0 > 0.0 && eta0 <= 1.0))
            throw NumericalError("eta0 must be in (0, 1]");
        if (!(eta_bias > 0.0 && eta_bias <= 1.0))
            throw NumericalError("eta-bias must be in (0,1]");
        if (!(excess_loss_db >= 0.0))
            throw NumericalError("excess loss must be >= 0 dB");
        const double peak = eta0 * eta0 * (1.0 + std::sqrt(eta_bias)) * (1.0 + std::sqrt(eta_bias));
        if (peak > 1.0 + 1e-9)
            throw NumericalError("curve peak transmittance exceeds 1 (active device)");
    }

    double eta0() const { return eta0_; }
    double eta_bias() const { return eta_bias_; }
    double excess_loss_db() const { return excess_loss_db_; }

    // Linear transmittance before the fixed excess loss; any real angle accepted.
    double linear_transmittance(double delta_phi) const {
        const double t = eta0_ * eta0_ *
                         (1.0 + eta_bias_ + 2.0 * std::sqrt(eta_bias_) * std::cos(delta_phi));
        return std::max(t, 0.0);
    }

    AttenuationSample attenuation_db(double delta_phi) const {
        const double t = linear_transmittance(delta_phi);
        if (t < kTransmittanceFloor)
            return {kSaturationDb + excess_loss_db_, true};
        return {std::fabs(db_from_linear(t)) + excess_loss_db_, false};
    }

    // Analytic d(alpha)/d(dphi) in dB/rad. Unbounded at a saturated point.
    double sensitivity_db_per_rad(double delta_phi) const {
        const double t = linear_transmittance(delta_phi);
        if (t < kTransmittanceFloor)
            throw NumericalError("attenuation sensitivity undefined at extinction point");
        const double dt = -2.0 * eta0_ * eta0_ * std::sqrt(eta_bias_) * std::sin(delta_phi);
        const double sign = (t < 1.0) ? -1.0 : 1.0;
        return sign * (10.0 / std::log(10.0)) * dt / t;
    }

    double min_alpha_db() const { return attenuation_db(0.0).alpha_db; }
    AttenuationSample max_alpha_db() const { return attenuation_db(kPi); }

private:
    double eta0_;
    double eta_bias_;
    double excess_loss_db_;
};

enum class Branch { Rising, Falling };

// Phase solving for a target attenuation. Rising branch returns dphi in
// [0, pi]; falling mirrors about pi into [pi, 2pi]. Targets within a small
// snap window (0.01 dB) of the achievable extremes resolve to the extreme
// itself, matching the two-decimal rounding of published anchor values.
inline double solve_operating_point(const AttenuationCurve& curve, double alpha_target_db,
                                    Branch branch = Branch::Rising) {
    constexpr double kEdgeSnapDb = 0.01;
    const double lo = curve.min_alpha_db();
    const AttenuationSample hi = curve.max_alpha_db();

    const auto mirror = [branch](double x) {
        return branch == Branch::Rising ? x : kTwoPi - x;
    };

    if (alpha_target_db < lo - kEdgeSnapDb || alpha_target_db > hi.alpha_db + kEdgeSnapDb) {
        std::ostringstream msg;
        msg << "attenuation target " << alpha_target_db
            << " dB outside achievable range [" << lo << ", " << hi.alpha_db;
        msg << (hi.saturated ? " (saturated)] dB" : "] dB");
        throw NumericalError(msg.str());
    }
    if (alpha_target_db <= lo) return mirror(0.0);
    if (alpha_target_db >= hi.alpha_db) return mirror(kPi);

    double a = 0.0, b = kPi;
    for (int i = 0; i < 200 && b - a > 0.0; ++i) {
        const double mid = 0.5 * (a + b);
        if (curve.attenuation_db(mid).alpha_db < alpha_target_db)
            a = mid;
        else
            b = mid;
    }
    const double root = 0.5 * (a + b);
    if (std::fabs(curve.attenuation_db(root).alpha_db - alpha_target_db) > 1e-9)
        throw NumericalError("operating-point bisection failed to converge");
    return mirror(root);
}

// Extremes of the attenuation over [dphi0 - delta_max, dphi0 + delta_max].
struct DeviationResult {
    double alpha0_db = 0.0;
    double delta_max = 0.0;
    double max_deviation_db = 0.0;  // max(alpha0 - min, max - alpha0)
    double alpha_min_db = 0.0;
    double alpha_max_db = 0.0;
    double deviation_up_db = 0.0;    // alpha_max - alpha0
    double deviation_down_db = 0.0;  // alpha0 - alpha_min
    bool saturated = false;          // interval touches the extinction floor
};

namespace detail {

// Golden-section refinement of an extremum bracketed by [a, b]; sign=+1
// maximizes alpha, sign=-1 minimizes.
inline double golden_refine(const AttenuationCurve& curve, double a, double b, double sign) {
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = sign * curve.attenuation_db(x1).alpha_db;
    double f2 = sign * curve.attenuation_db(x2).alpha_db;
    for (int i = 0; i < 80; ++i) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = sign * curve.attenuation_db(x2).alpha_db;
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = sign * curve.attenuation_db(x1).alpha_db;
        }
    }
    return sign * std::max(f1, f2);
}

}  // namespace detail

// Dense-grid scan (>= 10^4 points) plus golden-section refinement; grid
// search stays correct across saturated regions where calculus does not.
inline DeviationResult max_attenuation_deviation(const AttenuationCurve& curve, double dphi0,
                                                 double delta_max, std::size_t grid = 20001) {
    if (!(delta_max >= 0.0)) throw NumericalError("delta_max must be >= 0");
    if (grid < 10001) grid = 10001;

    DeviationResult r;
    r.alpha0_db = curve.attenuation_db(dphi0).alpha_db;
    r.delta_max = delta_max;
    if (delta_max == 0.0) {
        r.alpha_min_db = r.alpha_max_db = r.alpha0_db;
        r.saturated = curve.attenuation_db(dphi0).saturated;
        return r;
    }

    const double lo = dphi0 - delta_max, hi = dphi0 + delta_max;
    const double step = (hi - lo) / static_cast<double>(grid - 1);
    double amin = std::numeric_limits<double>::infinity();
    double amax = -amin;
    std::size_t imin = 0, imax = 0;
    for (std::size_t i = 0; i < grid; ++i) {
        const AttenuationSample s = curve.attenuation_db(lo + step * static_cast<double>(i));
        r.saturated = r.saturated || s.saturated;
        if (s.alpha_db < amin) { amin = s.alpha_db; imin = i; }
        if (s.alpha_db > amax) { amax = s.alpha_db; imax = i; }
    }
    const auto bracket = [&](std::size_t i, double sign) {
        const double a = lo + step * static_cast<double>(i > 0 ? i - 1 : 0);
        const double b = lo + step * static_cast<double>(std::min(i + 1, grid - 1));
        return detail::golden_refine(curve, a, b, sign);
    };
    amin = std::min(amin, bracket(imin, -1.0));
    amax = std::max(amax, bracket(imax, +1.0));

    r.alpha_min_db = amin;
    r.alpha_max_db = amax;
    r.deviation_up_db = amax - r.alpha0_db;
    r.deviation_down_db = r.alpha0_db - amin;
    r.max_deviation_db = std::max(r.deviation_up_db, r.deviation_down_db);
    return r;
}

// One stage of a cascade at a fixed operating phase.
struct StageOperatingPoint {
    AttenuationCurve curve;
    double delta_phi = 0.0;
};

// dB additivity of the linear transmittance product; saturation propagates.
inline AttenuationSample cascade_attenuation(const std::vector<StageOperatingPoint>& stages,
                                             double fixed_loss_db) {
    if (!(fixed_loss_db >= 0.0)) throw NumericalError("fixed loss must be >= 0 dB");
    AttenuationSample total{fixed_loss_db, false};
    for (const auto& s : stages) {
        const AttenuationSample a = s.curve.attenuation_db(s.delta_phi);
        total.alpha_db += a.alpha_db;
        total.saturated = total.saturated || a.saturated;
    }
    return total;
}

}  // namespace qkdvoa

#endif
