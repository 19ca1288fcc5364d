// Physical constants, pinned so regression numbers are bit-stable (CODATA 2018).
#pragma once

namespace csl {

inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double k_boltzmann = 1.380649e-23;      // J/K (exact)
inline constexpr double c_light = 2.99792458e8;          // m/s (exact)
inline constexpr double atomic_mass_unit = 1.66053906660e-27; // kg

// Reference mass in the collapse-noise coupling (1 amu by convention).
inline constexpr double collapse_reference_mass = atomic_mass_unit; // kg

// Candidate collapse-strength anchors commonly used for sweep bounds.
inline constexpr double gamma_grw = 1e-36;  // m^3/s
inline constexpr double gamma_adler = 1e-28; // m^3/s

// Variance of each vacuum quadrature in this library's convention.
inline constexpr double vacuum_variance = 0.5;

} // namespace csl
