#include "morsekit/estimators.hpp"

#include <cmath>
#include <limits>

#include "morsekit/atomic.hpp"
#include "morsekit/errors.hpp"
#include "morsekit/units.hpp"

namespace morsekit {

ScatteringRate photon_scattering_rate(const ProbeBeam& beam) {
    if (beam.intensity_w_m2 < 0.0) throw DomainError("intensity must be non-negative");
    if (!(beam.wavelength_m > 0.0)) throw DomainError("wavelength must be positive");
    if (!(beam.natural_linewidth_hz > 0.0))
        throw DomainError("natural linewidth must be positive");

    using namespace constants;
    const double lambda3 = std::pow(beam.wavelength_m, 3);
    ScatteringRate rate;
    rate.saturation_intensity_w_m2 = 2.0 * pi * pi * hbar_j_s * speed_of_light_m_s *
                                     beam.natural_linewidth_hz / (3.0 * lambda3);
    const double detuning_ratio = 2.0 * beam.detuning_hz / beam.natural_linewidth_hz;
    rate.saturation = beam.intensity_w_m2 / rate.saturation_intensity_w_m2 /
                      (1.0 + detuning_ratio * detuning_ratio);
    rate.exact_hz = 0.5 * beam.natural_linewidth_hz * rate.saturation /
                    (1.0 + rate.saturation);
    rate.far_detuned_valid =
        std::abs(beam.detuning_hz) >= 10.0 * beam.natural_linewidth_hz;
    if (beam.detuning_hz != 0.0) {
        rate.far_detuned_hz = 3.0 * beam.intensity_w_m2 * lambda3 *
                              beam.natural_linewidth_hz * beam.natural_linewidth_hz /
                              (16.0 * pi * pi * hbar_j_s * speed_of_light_m_s *
                               beam.detuning_hz * beam.detuning_hz);
    } else {
        rate.far_detuned_hz = std::numeric_limits<double>::infinity();
        rate.far_detuned_valid = false;
    }
    return rate;
}

GradientBroadening gradient_broadening(const CellGeometry& geom, double g_f) {
    if (!(geom.length_m > 0.0)) throw DomainError("cell length must be positive");
    if (!(geom.temperature_k > 0.0)) throw DomainError("temperature must be positive");
    if (!(geom.atomic_mass_kg > 0.0)) throw DomainError("atomic mass must be positive");

    GradientBroadening out;
    out.thermal_velocity_m_s =
        std::sqrt(constants::boltzmann_j_k * geom.temperature_k / geom.atomic_mass_kg);
    // Precession-rate spread per field difference, in ordinary Hz per mG.
    const double hz_per_mg = std::abs(g_f) * constants::mu_bohr_hz_per_gauss /
                             constants::milligauss_per_gauss;
    out.coefficient_hz_m2_per_mg2 = hz_per_mg * hz_per_mg *
                                    std::pow(geom.length_m, 3) /
                                    out.thermal_velocity_m_s;
    out.rate_hz = out.coefficient_hz_m2_per_mg2 * geom.gradient_mg_per_m *
                  geom.gradient_mg_per_m;
    return out;
}

ResolutionCheck resolution_criterion(const CellGeometry& geom, double g_f,
                                     double nu_hfs_hz,
                                     std::optional<double> measured_coefficient) {
    if (!(geom.bias_gauss > 0.0)) throw DomainError("bias field must be positive");
    if (!(nu_hfs_hz > 0.0)) throw DomainError("hyperfine splitting must be positive");

    ResolutionCheck check;
    check.larmor_hz =
        std::abs(g_f) * constants::mu_bohr_hz_per_gauss * geom.bias_gauss;
    check.qz_splitting_hz = qz_splitting_hz(check.larmor_hz, nu_hfs_hz);
    check.coefficient_hz_m2_per_mg2 =
        measured_coefficient.value_or(gradient_broadening(geom, g_f).coefficient_hz_m2_per_mg2);
    if (!(check.coefficient_hz_m2_per_mg2 > 0.0))
        throw DomainError("broadening coefficient must be positive");
    // Gradient at which the inhomogeneous width eats the quadratic splitting.
    check.critical_gradient_mg_per_m =
        std::sqrt(check.qz_splitting_hz / check.coefficient_hz_m2_per_mg2);
    const double bias_mg = geom.bias_gauss * constants::milligauss_per_gauss;
    check.threshold = check.critical_gradient_mg_per_m * geom.length_m / bias_mg;
    check.relative_inhomogeneity =
        std::abs(geom.gradient_mg_per_m) * geom.length_m / bias_mg;
    check.resolved = check.relative_inhomogeneity < check.threshold;
    return check;
}

double critical_density_cm3(double wavelength_m, double natural_linewidth_hz,
                            double doppler_width_hz, double extent_m) {
    if (!(wavelength_m > 0.0) || !(natural_linewidth_hz > 0.0) ||
        !(doppler_width_hz > 0.0) || !(extent_m > 0.0))
        throw DomainError("critical-density inputs must be positive");
    const double cross_section_scale = wavelength_m * wavelength_m /
                                       (2.0 * constants::pi) *
                                       (natural_linewidth_hz / doppler_width_hz);
    const double density_m3 = 1.0 / (cross_section_scale * extent_m);
    return density_m3 * 1e-6; // m^-3 -> cm^-3
}

QuadraticBroadeningFit fit_gradient_broadening(
    const std::vector<double>& gradients_mg_per_m, const std::vector<double>& widths_hz) {
    const std::size_t n = gradients_mg_per_m.size();
    if (n != widths_hz.size()) throw DomainError("gradient/width lengths differ");
    if (n < 3) throw EstimationError("need at least three points for the quadratic fit");

    // Ordinary least squares on x = gradient^2: width = intercept + slope x.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = gradients_mg_per_m[i] * gradients_mg_per_m[i];
        sx += x;
        sy += widths_hz[i];
        sxx += x * x;
        sxy += x * widths_hz[i];
    }
    const double count = static_cast<double>(n);
    const double det = count * sxx - sx * sx;
    if (std::abs(det) < 1e-12 * (count * sxx + sx * sx + 1e-300))
        throw EstimationError("degenerate gradient spread: all points at one gradient^2");

    QuadraticBroadeningFit fit;
    fit.points = n;
    fit.slope_hz_m2_per_mg2 = (count * sxy - sx * sy) / det;
    fit.intercept_hz = (sy - fit.slope_hz_m2_per_mg2 * sx) / count;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = gradients_mg_per_m[i] * gradients_mg_per_m[i];
        const double r = widths_hz[i] - fit.intercept_hz - fit.slope_hz_m2_per_mg2 * x;
        ss += r * r;
    }
    fit.residual_norm = std::sqrt(ss);
    return fit;
}

} // namespace morsekit
