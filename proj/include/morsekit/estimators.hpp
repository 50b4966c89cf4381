#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace morsekit {

/// All estimators in this header are order-of-magnitude tools: the
/// underlying formulas are deliberately crude about factors of 2 and pi,
/// and every result struct carries `order_of_magnitude = true` to keep
/// reports honest about that contract.

/// Off-resonant probe (or pump) beam acting on a two-level transition.
struct ProbeBeam {
    double intensity_w_m2 = 0.0;      ///< time-averaged intensity
    double wavelength_m = 0.0;        ///< transition wavelength
    double natural_linewidth_hz = 0.0; ///< gamma (FWHM, ordinary Hz)
    double detuning_hz = 0.0;         ///< signed detuning from resonance
};

struct ScatteringRate {
    double exact_hz = 0.0;        ///< (gamma/2) s/(1+s), full saturation form
    double far_detuned_hz = 0.0;  ///< 3 I lambda^3 gamma^2 / (16 pi^2 hbar c Delta^2)
    double saturation = 0.0;      ///< s = (I/I_sat) / (1 + (2 Delta/gamma)^2)
    double saturation_intensity_w_m2 = 0.0; ///< I_sat = 2 pi^2 hbar c gamma / (3 lambda^3)
    bool far_detuned_valid = false; ///< |Delta| >= 10 gamma
    bool order_of_magnitude = true;
};

/// Photon scattering rate of an atom in the beam, both the full two-level
/// saturation form and its far-detuned limit. The far-detuned form needs
/// detuning != 0.
ScatteringRate photon_scattering_rate(const ProbeBeam& beam);

/// Thermal vapor cell in a bias field along the probe axis.
struct CellGeometry {
    double length_m = 0.0;
    double temperature_k = 0.0;
    double atomic_mass_kg = 0.0;
    double bias_gauss = 0.0;
    double gradient_mg_per_m = 0.0; ///< field gradient along the cell, signed
};

struct GradientBroadening {
    double rate_hz = 0.0;        ///< coefficient * gradient^2
    double coefficient_hz_m2_per_mg2 = 0.0; ///< (g_F mu_B/h)^2 L^3 / v in Hz/mG-per-m units
    double thermal_velocity_m_s = 0.0;      ///< v = sqrt(k_B T / m)
    bool order_of_magnitude = true;
};

/// Dephasing from a linear field gradient across the cell: atoms on the two
/// ends precess at rates differing by (g_F mu_B/h) * gradient * L, randomized
/// on the wall-to-wall transit time L/v.
GradientBroadening gradient_broadening(const CellGeometry& geom, double g_f);

struct ResolutionCheck {
    double relative_inhomogeneity = 0.0; ///< (1/B)(dB/dz) L, dimensionless
    double threshold = 0.0;              ///< value at which broadening = qz splitting
    double qz_splitting_hz = 0.0;
    double larmor_hz = 0.0;
    double critical_gradient_mg_per_m = 0.0;
    double coefficient_hz_m2_per_mg2 = 0.0; ///< the coefficient the threshold used
    bool resolved = false;                  ///< relative_inhomogeneity < threshold
    bool order_of_magnitude = true;
};

/// Can the quadratic Zeeman line splitting be resolved against gradient
/// broadening?  Threshold = (1/B) g_crit L where the critical gradient
/// g_crit solves coefficient * g^2 = qz splitting. The broadening
/// coefficient defaults to the model value from gradient_broadening(); a
/// measured coefficient may be supplied instead.
ResolutionCheck resolution_criterion(const CellGeometry& geom, double g_f,
                                     double nu_hfs_hz,
                                     std::optional<double> measured_coefficient =
                                         std::nullopt);

/// Critical vapor density for radiation trapping,
/// rho_c = [lambda^2/(2 pi) * (gamma/doppler_width) * extent]^-1, in cm^-3.
double critical_density_cm3(double wavelength_m, double natural_linewidth_hz,
                            double doppler_width_hz, double extent_m);

/// Quadratic line-broadening law width = intercept + slope * gradient^2,
/// fitted by linear least squares in gradient^2.
struct QuadraticBroadeningFit {
    double intercept_hz = 0.0;
    double slope_hz_m2_per_mg2 = 0.0;
    double residual_norm = 0.0;
    std::size_t points = 0;
};

QuadraticBroadeningFit fit_gradient_broadening(const std::vector<double>& gradients_mg_per_m,
                                               const std::vector<double>& widths_hz);

} // namespace morsekit
