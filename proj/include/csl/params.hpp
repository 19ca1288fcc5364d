// Optomechanical system parameters and the documented default configuration.
#pragma once

#include <cmath>
#include <numbers>

#include "csl/errors.hpp"

namespace csl {

// All rates are angular frequencies (rad/s). kappa and delta follow the same
// angular convention; this choice is flagged in the README because some data
// sheets quote them as ordinary frequencies.
struct SystemParams {
    double mass;             // kg
    double omega_m;          // rad/s
    double gamma_m;          // rad/s
    double kappa;            // rad/s, cavity amplitude decay
    double delta;            // rad/s, detuning (any sign)
    double cavity_length;    // m
    double laser_power;      // W
    double laser_wavelength; // m
    double temperature;      // K
    double r_c;              // m, collapse-noise correlation length
    double material_density; // kg/m^3

    // Reference configuration: 15 ng silica sphere, omega_m/2pi = 275 kHz,
    // Q = 1e5, kappa = 5e7 rad/s, delta = 5 kappa, 25 mm cavity, 2 mW pump
    // at 1064 nm, 1 mK bath, r_c = 100 nm.
    static SystemParams defaults() {
        SystemParams p;
        p.mass = 1.5e-11;
        p.omega_m = 2.0 * std::numbers::pi * 2.75e5;
        p.gamma_m = p.omega_m / 1e5;
        p.kappa = 5e7;
        p.delta = 5.0 * p.kappa;
        p.cavity_length = 0.025;
        p.laser_power = 0.002;
        p.laser_wavelength = 1.064e-6;
        p.temperature = 1e-3;
        p.r_c = 1e-7;
        p.material_density = 2200.0;
        return p;
    }
};

// Throws ValidationError naming the first offending field.
inline void validate(const SystemParams& p) {
    auto positive = [](double v, const char* key) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(key, "must be positive and finite");
    };
    positive(p.mass, "mass");
    positive(p.omega_m, "omega_m");
    positive(p.gamma_m, "gamma_m");
    positive(p.kappa, "kappa");
    if (!std::isfinite(p.delta)) throw ValidationError("delta", "must be finite");
    positive(p.cavity_length, "cavity_length");
    positive(p.laser_power, "laser_power");
    positive(p.laser_wavelength, "laser_wavelength");
    if (!(p.temperature >= 0.0) || !std::isfinite(p.temperature))
        throw ValidationError("temperature", "must be nonnegative and finite");
    positive(p.r_c, "r_c");
    positive(p.material_density, "material_density");
}

} // namespace csl
