#ifndef QKDVOA_DRIVE_HPP
#define QKDVOA_DRIVE_HPP

#include <array>
#include <cmath>
#include <sstream>

#include "qkdvoa/photonic.hpp"

namespace qkdvoa {

// Resistive heater phase shifter. Phase follows dissipated power:
//   phi(U) = offset + kappa * U^2 / R
// with the drive voltage quantized to the supply resolution (1 mV default).
class ThermoOpticShifter {
public:
    ThermoOpticShifter(double kappa_rad_per_watt, double phase_offset_rad,
                       double resistance_ohm = 3000.0, double voltage_step_v = 1e-3,
                       double max_voltage_v = 12.0)
        : kappa_(kappa_rad_per_watt),
          offset_(phase_offset_rad),
          resistance_(resistance_ohm),
          step_(voltage_step_v),
          max_voltage_(max_voltage_v) {
        if (!(resistance_ > 0.0)) throw NumericalError("heater resistance must be > 0");
        if (!(kappa_ > 0.0)) throw NumericalError("thermo-optic efficiency must be > 0");
        if (!(step_ > 0.0)) throw NumericalError("voltage step must be > 0");
        if (!(max_voltage_ > 0.0)) throw NumericalError("max voltage must be > 0");
    }

    double kappa_rad_per_watt() const { return kappa_; }
    double phase_offset_rad() const { return offset_; }
    double resistance_ohm() const { return resistance_; }
    double voltage_step_v() const { return step_; }
    double max_voltage_v() const { return max_voltage_; }

    double quantize(double voltage) const {
        return step_ * static_cast<double>(std::llround(voltage / step_));
    }

    double phase_for_voltage(double voltage) const {
        if (!(voltage >= 0.0) || voltage > max_voltage_ + 0.5 * step_) {
            std::ostringstream msg;
            msg << "drive voltage " << voltage << " V outside [0, " << max_voltage_ << "] V";
            throw NumericalError(msg.str());
        }
        const double u = quantize(voltage);
        return offset_ + kappa_ * u * u / resistance_;
    }

    // Inverse of the quadratic law on the rising leg; phase must be >= offset.
    double voltage_for_phase(double phase) const {
        if (phase < offset_ - 1e-12)
            throw NumericalError("requested phase below zero-voltage offset");
        const double u = std::sqrt(std::max(phase - offset_, 0.0) * resistance_ / kappa_);
        if (u > max_voltage_ + 0.5 * step_)
            throw NumericalError("requested phase beyond voltage range");
        return u;
    }

private:
    double kappa_;
    double offset_;
    double resistance_;
    double step_;
    double max_voltage_;
};

// Two published (voltage pair, attenuation) anchors the fit must reproduce.
struct CalibrationTargets {
    double max_u1_v = 11.0, max_u2_v = 5.5, max_alpha_db = 39.14;
    double min_u1_v = 6.7, min_u2_v = 11.1, min_alpha_db = 12.73;
    double eta0 = 0.5, eta_bias = 0.5;
    double resistance_ohm = 3000.0;
    double voltage_step_v = 1e-3;
    double max_voltage_v = 12.0;
    double nominal_fixed_loss_db = 8.0;  // two grating couplers at 4 dB each
};

struct CalibrationReport {
    double fitted_fixed_loss_db = 0.0;
    double nominal_fixed_loss_db = 8.0;
    double max_residual_db = 0.0;  // worst |model - target| over the anchor set
    double stage_alpha_at_min_point_db = 0.0;
};

// Two cascaded biased stages behind fixed coupler/insertion loss, each with
// its own heater calibration.
class ChipModel {
public:
    struct Stage {
        AttenuationCurve curve;
        ThermoOpticShifter shifter;
    };

    ChipModel(Stage stage1, Stage stage2, double fixed_loss_db, CalibrationReport report = {})
        : stages_{std::move(stage1), std::move(stage2)},
          fixed_loss_db_(fixed_loss_db),
          report_(report) {
        if (!(fixed_loss_db_ >= 0.0)) throw NumericalError("fixed loss must be >= 0 dB");
    }

    const Stage& stage(std::size_t i) const { return stages_.at(i); }
    double fixed_loss_db() const { return fixed_loss_db_; }
    const CalibrationReport& report() const { return report_; }

    double stage_phase(std::size_t i, double voltage) const {
        return stages_.at(i).shifter.phase_for_voltage(voltage);
    }

    AttenuationSample attenuation_db(double u1, double u2) const {
        return cascade_attenuation(
            {{stages_[0].curve, stage_phase(0, u1)}, {stages_[1].curve, stage_phase(1, u2)}},
            fixed_loss_db_);
    }

    AttenuationSample attenuation_at_phases(double dphi1, double dphi2) const {
        return cascade_attenuation(
            {{stages_[0].curve, dphi1}, {stages_[1].curve, dphi2}}, fixed_loss_db_);
    }

private:
    std::array<Stage, 2> stages_;
    double fixed_loss_db_;
    CalibrationReport report_;
};

// Reconstruct per-stage (kappa, offset) and the fixed loss from the two
// anchors. The maximum-attenuation voltages pin both stages at dphi = pi,
// which fixes the loss budget; the minimum anchor is met by placing the
// stage phases at the symmetric residual attenuation on either side of pi.
inline ChipModel calibrate_chip(const CalibrationTargets& t = {}) {
    const AttenuationCurve curve(t.eta0, t.eta_bias);
    const AttenuationSample stage_max = curve.max_alpha_db();
    if (stage_max.saturated)
        throw CalibrationError("stage curve saturates at its extremum; biased curve required");

    const double fixed = t.max_alpha_db - 2.0 * stage_max.alpha_db;
    if (fixed < 0.0) {
        std::ostringstream msg;
        msg << "max-attenuation target " << t.max_alpha_db
            << " dB below two-stage extremum " << 2.0 * stage_max.alpha_db << " dB";
        throw CalibrationError(msg.str());
    }

    const double residual = 0.5 * (t.min_alpha_db - fixed);
    if (residual < curve.min_alpha_db() - 1e-9 || residual > stage_max.alpha_db + 1e-9) {
        std::ostringstream msg;
        msg << "min-attenuation target needs " << residual
            << " dB per stage, outside the curve range [" << curve.min_alpha_db() << ", "
            << stage_max.alpha_db << "] dB";
        throw CalibrationError(msg.str());
    }
    const double phi_min = solve_operating_point(curve, residual, Branch::Rising);

    const auto fit_stage = [&](double u_max, double u_min) {
        const double pmax = u_max * u_max / t.resistance_ohm;
        const double pmin = u_min * u_min / t.resistance_ohm;
        if (std::fabs(pmax - pmin) < 1e-15)
            throw CalibrationError("anchor voltages coincide; stage fit underdetermined");
        // Rising leg of the quadratic passes through pi at u_max; the min
        // anchor sits at phi_min below pi (u_min < u_max) or mirrored above
        // it (u_min > u_max).
        const double phi_at_min = (u_min < u_max) ? phi_min : kTwoPi - phi_min;
        const double kappa = (kPi - phi_at_min) / (pmax - pmin);
        if (!(kappa > 0.0))
            throw CalibrationError("fitted thermo-optic efficiency not positive");
        const double offset = kPi - kappa * pmax;
        return ThermoOpticShifter(kappa, offset, t.resistance_ohm, t.voltage_step_v,
                                  t.max_voltage_v);
    };

    ChipModel::Stage s1{curve, fit_stage(t.max_u1_v, t.min_u1_v)};
    ChipModel::Stage s2{curve, fit_stage(t.max_u2_v, t.min_u2_v)};

    CalibrationReport report;
    report.fitted_fixed_loss_db = fixed;
    report.nominal_fixed_loss_db = t.nominal_fixed_loss_db;
    report.stage_alpha_at_min_point_db = residual;

    ChipModel chip(std::move(s1), std::move(s2), fixed, report);
    const double r_max = std::fabs(chip.attenuation_db(t.max_u1_v, t.max_u2_v).alpha_db -
                                   t.max_alpha_db);
    const double r_min = std::fabs(chip.attenuation_db(t.min_u1_v, t.min_u2_v).alpha_db -
                                   t.min_alpha_db);
    CalibrationReport checked = chip.report();
    checked.max_residual_db = std::max(r_max, r_min);
    if (checked.max_residual_db > 0.1)
        throw CalibrationError("calibrated chip misses an anchor by more than 0.1 dB");
    return ChipModel(chip.stage(0), chip.stage(1), fixed, checked);
}

}  // namespace qkdvoa

#endif
