#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "morsekit/atomic.hpp"
#include "morsekit/errors.hpp"
#include "morsekit/estimators.hpp"
#include "morsekit/units.hpp"

using namespace morsekit;

namespace {

ProbeBeam reference_beam() {
    ProbeBeam beam;
    beam.intensity_w_m2 = units::w_m2_from_mw_cm2(1.0);
    beam.wavelength_m = 852e-9;
    beam.natural_linewidth_hz = 5.2e6;
    beam.detuning_hz = 1e9;
    return beam;
}

CellGeometry reference_cell() {
    CellGeometry cell;
    cell.length_m = 0.03;
    cell.temperature_k = 300.0;
    cell.atomic_mass_kg = 2.20694650e-25;
    cell.bias_gauss = 0.929;
    cell.gradient_mg_per_m = 10.0;
    return cell;
}

} // namespace

TEST_CASE("photon scattering rate of a weak far-detuned probe") {
    const ScatteringRate rate = photon_scattering_rate(reference_beam());
    CHECK(rate.far_detuned_hz == doctest::Approx(100.4917).epsilon(1e-3));
    CHECK(rate.exact_hz == doctest::Approx(rate.far_detuned_hz).epsilon(1e-3));
    CHECK(rate.saturation_intensity_w_m2 == doctest::Approx(1.749).epsilon(1e-3));
    CHECK(rate.saturation == doctest::Approx(3.865e-5).epsilon(0.01));
    CHECK(rate.far_detuned_valid);
    CHECK(rate.order_of_magnitude);
}

TEST_CASE("scattering rate limits and gatekeeping") {
    ProbeBeam dark = reference_beam();
    dark.intensity_w_m2 = 0.0;
    const ScatteringRate off = photon_scattering_rate(dark);
    CHECK(off.exact_hz == 0.0);
    CHECK(off.far_detuned_hz == 0.0);
    CHECK(off.saturation == 0.0);

    ProbeBeam resonant = reference_beam();
    resonant.detuning_hz = 0.0;
    const ScatteringRate on = photon_scattering_rate(resonant);
    CHECK(std::isinf(on.far_detuned_hz));
    CHECK_FALSE(on.far_detuned_valid);
    // high saturation: exact rate approaches gamma/2 from below
    CHECK(on.exact_hz < 0.5 * resonant.natural_linewidth_hz);
    CHECK(on.exact_hz > 0.0);

    ProbeBeam near = reference_beam();
    near.detuning_hz = 9.0 * near.natural_linewidth_hz;
    CHECK_FALSE(photon_scattering_rate(near).far_detuned_valid);
    near.detuning_hz = 10.0 * near.natural_linewidth_hz;
    CHECK(photon_scattering_rate(near).far_detuned_valid);

    ProbeBeam bad = reference_beam();
    bad.intensity_w_m2 = -1.0;
    CHECK_THROWS_AS(photon_scattering_rate(bad), DomainError);
    bad = reference_beam();
    bad.wavelength_m = 0.0;
    CHECK_THROWS_AS(photon_scattering_rate(bad), DomainError);
    bad = reference_beam();
    bad.natural_linewidth_hz = 0.0;
    CHECK_THROWS_AS(photon_scattering_rate(bad), DomainError);
}

TEST_CASE("gradient broadening coefficient for the reference cell") {
    const AtomSpecies cs = cesium();
    const double g_upper = g_factor(cs, 4.0);
    const GradientBroadening broad = gradient_broadening(reference_cell(), g_upper);
    CHECK(broad.thermal_velocity_m_s == doctest::Approx(137.0).epsilon(1e-3));
    CHECK(broad.coefficient_hz_m2_per_mg2 ==
          doctest::Approx(0.02411828175172659).epsilon(1e-12));
    CHECK(broad.rate_hz ==
          doctest::Approx(100.0 * broad.coefficient_hz_m2_per_mg2).epsilon(1e-12));
    CHECK(broad.order_of_magnitude);

    // quadratic in the gradient, even in the g-factor sign
    CellGeometry doubled = reference_cell();
    doubled.gradient_mg_per_m = 20.0;
    CHECK(gradient_broadening(doubled, g_upper).rate_hz ==
          doctest::Approx(4.0 * broad.rate_hz).epsilon(1e-12));
    CHECK(gradient_broadening(reference_cell(), -g_upper).coefficient_hz_m2_per_mg2 ==
          doctest::Approx(broad.coefficient_hz_m2_per_mg2).epsilon(1e-15));

    CellGeometry bad = reference_cell();
    bad.length_m = 0.0;
    CHECK_THROWS_AS(gradient_broadening(bad, g_upper), DomainError);
    bad = reference_cell();
    bad.temperature_k = -1.0;
    CHECK_THROWS_AS(gradient_broadening(bad, g_upper), DomainError);
}

TEST_CASE("line-splitting resolution criterion") {
    const AtomSpecies cs = cesium();
    const double g_upper = g_factor(cs, 4.0);
    const CellGeometry cell = reference_cell();

    const ResolutionCheck measured =
        resolution_criterion(cell, g_upper, cs.hyperfine_splitting_hz, 0.0158);
    CHECK(measured.threshold == doctest::Approx(1.2315e-3).epsilon(1e-3));
    CHECK(measured.qz_splitting_hz == doctest::Approx(22.98).epsilon(1e-3));
    CHECK(measured.larmor_hz == doctest::Approx(324980.0).epsilon(1e-3));
    CHECK(measured.relative_inhomogeneity ==
          doctest::Approx(10.0 * 0.03 / 929.0).epsilon(1e-12));
    CHECK(measured.coefficient_hz_m2_per_mg2 == 0.0158);
    CHECK(measured.resolved); // 3.2e-4 < 1.2e-3
    CHECK(measured.critical_gradient_mg_per_m ==
          doctest::Approx(std::sqrt(measured.qz_splitting_hz / 0.0158)).epsilon(1e-12));

    const ResolutionCheck modeled =
        resolution_criterion(cell, g_upper, cs.hyperfine_splitting_hz);
    CHECK(modeled.threshold == doctest::Approx(9.9675e-4).epsilon(1e-3));
    CHECK(modeled.coefficient_hz_m2_per_mg2 ==
          doctest::Approx(0.02411828175172659).epsilon(1e-12));
    CHECK(modeled.resolved);

    CellGeometry steep = cell;
    steep.gradient_mg_per_m = 50.0; // 1.6e-3 > both thresholds
    CHECK_FALSE(resolution_criterion(steep, g_upper, cs.hyperfine_splitting_hz, 0.0158)
                    .resolved);

    CellGeometry bad = cell;
    bad.bias_gauss = 0.0;
    CHECK_THROWS_AS(resolution_criterion(bad, g_upper, cs.hyperfine_splitting_hz),
                    DomainError);
    CHECK_THROWS_AS(resolution_criterion(cell, g_upper, 0.0), DomainError);
    CHECK_THROWS_AS(resolution_criterion(cell, g_upper, cs.hyperfine_splitting_hz, -1.0),
                    DomainError);
}

TEST_CASE("critical vapor density for radiation trapping") {
    const double rho_c = critical_density_cm3(894e-9, 4.6e6, 378e6, 0.03);
    CHECK(rho_c == doctest::Approx(2.1534e10).epsilon(1e-3));

    // inverse proportionality to the trap extent and to the linewidth
    CHECK(critical_density_cm3(894e-9, 4.6e6, 378e6, 0.06) ==
          doctest::Approx(0.5 * rho_c).epsilon(1e-12));
    CHECK(critical_density_cm3(894e-9, 9.2e6, 378e6, 0.03) ==
          doctest::Approx(0.5 * rho_c).epsilon(1e-12));

    CHECK_THROWS_AS(critical_density_cm3(0.0, 4.6e6, 378e6, 0.03), DomainError);
    CHECK_THROWS_AS(critical_density_cm3(894e-9, 0.0, 378e6, 0.03), DomainError);
    CHECK_THROWS_AS(critical_density_cm3(894e-9, 4.6e6, 0.0, 0.03), DomainError);
    CHECK_THROWS_AS(critical_density_cm3(894e-9, 4.6e6, 378e6, 0.0), DomainError);
}

TEST_CASE("quadratic broadening fit recovers exact coefficients") {
    const double intercept = 3.0, slope = 0.0158;
    std::vector<double> gradients = {0.0, 5.0, 10.0, 15.0, 20.0, 30.0};
    std::vector<double> widths;
    for (double g : gradients) widths.push_back(intercept + slope * g * g);

    const QuadraticBroadeningFit fit = fit_gradient_broadening(gradients, widths);
    CHECK(fit.intercept_hz == doctest::Approx(intercept).epsilon(1e-9));
    CHECK(fit.slope_hz_m2_per_mg2 == doctest::Approx(slope).epsilon(1e-9));
    CHECK(fit.residual_norm < 1e-9);
    CHECK(fit.points == gradients.size());

    CHECK_THROWS_AS(fit_gradient_broadening({1.0, 2.0}, {1.0, 2.0, 3.0}), DomainError);
    CHECK_THROWS_AS(fit_gradient_broadening({1.0, 2.0}, {1.0, 2.0}), EstimationError);
    // +g and -g share the same gradient^2: degenerate design matrix
    CHECK_THROWS_AS(fit_gradient_broadening({-5.0, 5.0, 5.0}, {1.0, 1.0, 1.0}),
                    EstimationError);
}

TEST_CASE("unit conversions used by the estimators") {
    CHECK(units::w_m2_from_mw_cm2(1.0) == 10.0);
    CHECK(units::mw_cm2_from_w_m2(10.0) == 1.0);
    CHECK(units::mg_per_m_from_t_per_m(1.0) == 1e7);
    CHECK(units::t_per_m_from_mg_per_m(1e7) == 1.0);
    CHECK(units::gauss_from_tesla(1.0) == 1e4);
    CHECK(units::rad_s_from_hz(1.0) == doctest::Approx(2.0 * constants::pi));
}
