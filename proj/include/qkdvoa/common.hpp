#ifndef QKDVOA_COMMON_HPP
#define QKDVOA_COMMON_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace qkdvoa {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// Linear transmittance below this floor is treated as fully extinguished;
// attenuation values are clamped to the corresponding dB and flagged.
inline constexpr double kTransmittanceFloor = 1e-12;
inline constexpr double kSaturationDb = 120.0;  // |10 log10(1e-12)|

// Thrown when a configuration file or CLI argument is invalid (exit code 2).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a fit/bisection cannot reach its target (exit code 3).
class CalibrationError : public std::runtime_error {
public:
    explicit CalibrationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on numerical domain violations and internal consistency failures (exit code 3).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Reduce an angle to the canonical range (-pi, pi].
inline double canonical_phase(double x) {
    double r = std::fmod(x + kPi, kTwoPi);
    if (r <= 0.0) r += kTwoPi;
    return r - kPi;
}

// Reduce an angle to [0, 2*pi).
inline double wrap_two_pi(double x) {
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    return r;
}

inline double db_from_linear(double t) { return 10.0 * std::log10(t); }
inline double linear_from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace qkdvoa

#endif
