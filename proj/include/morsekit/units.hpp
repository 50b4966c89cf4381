#pragma once

#include <numbers>

/// Physical constants and unit conversions.
///
/// Internal conventions used throughout the library:
///   * energies are stored as ordinary frequencies E/h in Hz;
///   * linewidths are FWHM in ordinary Hz;
///   * magnetic fields are in Gauss (with labeled tesla alternatives);
///   * angular frequencies (rad/s) appear only inside the pulsed two-level
///     propagator and are converted at its boundary.
namespace morsekit::constants {

inline constexpr double pi = std::numbers::pi;

// 2018 SI exact values.
inline constexpr double planck_j_s = 6.62607015e-34;       // h
inline constexpr double hbar_j_s = 1.054571817e-34;        // h / 2 pi
inline constexpr double speed_of_light_m_s = 2.99792458e8; // c
inline constexpr double boltzmann_j_k = 1.380649e-23;      // k_B

// Magnetic moments over h, in frequency-per-field form (CODATA 2018).
inline constexpr double mu_bohr_hz_per_gauss = 1.399624604e6; // mu_B / h
inline constexpr double mu_nuclear_hz_per_gauss = 762.2593;   // mu_N / h

inline constexpr double gauss_per_tesla = 1.0e4;
inline constexpr double milligauss_per_gauss = 1.0e3;

} // namespace morsekit::constants

namespace morsekit::units {

/// Field conversions.
inline constexpr double gauss_from_tesla(double tesla) {
    return tesla * constants::gauss_per_tesla;
}
inline constexpr double tesla_from_gauss(double gauss) {
    return gauss / constants::gauss_per_tesla;
}

/// Gradient conversions (1 T/m = 1e7 mG/m).
inline constexpr double mg_per_m_from_t_per_m(double t_per_m) {
    return t_per_m * constants::gauss_per_tesla * constants::milligauss_per_gauss;
}
inline constexpr double t_per_m_from_mg_per_m(double mg_per_m) {
    return mg_per_m / (constants::gauss_per_tesla * constants::milligauss_per_gauss);
}

/// Beam intensity: 1 mW/cm^2 = 10 W/m^2.
inline constexpr double w_m2_from_mw_cm2(double mw_cm2) { return mw_cm2 * 10.0; }
inline constexpr double mw_cm2_from_w_m2(double w_m2) { return w_m2 / 10.0; }

/// Ordinary frequency <-> angular frequency.
inline constexpr double rad_s_from_hz(double hz) { return 2.0 * constants::pi * hz; }
inline constexpr double hz_from_rad_s(double rad_s) { return rad_s / (2.0 * constants::pi); }

} // namespace morsekit::units
