#include "morsekit/atomic.hpp"

#include <cmath>
#include <string>

#include "morsekit/errors.hpp"
#include "morsekit/units.hpp"

namespace morsekit {
namespace {

bool is_half_integral(double v) {
    return std::abs(2.0 * v - std::round(2.0 * v)) < 1e-9;
}

bool is_integral(double v) { return std::abs(v - std::round(v)) < 1e-9; }

void validate_species(const AtomSpecies& s) {
    if (!(s.nuclear_spin > 0.0) || !is_half_integral(s.nuclear_spin))
        throw DomainError("nuclear spin must be a positive (half-)integer");
    if (!(s.hyperfine_splitting_hz > 0.0))
        throw DomainError("hyperfine splitting must be positive");
    if (!(s.electron_j > 0.0) || !is_half_integral(s.electron_j))
        throw DomainError("electron J must be a positive (half-)integer");
}

/// Nuclear Zeeman shift coefficient (mu_I / I) * mu_N / h, Hz per Gauss.
double nuclear_shift_hz_per_gauss(const AtomSpecies& s) {
    return s.nuclear_moment_nuclear / s.nuclear_spin * constants::mu_nuclear_hz_per_gauss;
}

/// +1 for the upper manifold (F = I + J), -1 for the lower one.
int branch_sign(const AtomSpecies& s, double f) {
    if (std::abs(f - s.f_upper()) < 1e-9) return +1;
    if (std::abs(f - s.f_lower()) < 1e-9) return -1;
    throw DomainError("F must be one of the two hyperfine manifolds, got F=" +
                      std::to_string(f));
}

} // namespace

AtomSpecies cesium() {
    AtomSpecies s;
    s.name = "cesium";
    s.nuclear_spin = 3.5;
    s.hyperfine_splitting_hz = 9.1926e9;
    s.electron_moment_bohr = -1.0011596521869;
    s.nuclear_moment_nuclear = 2.582025;
    s.electron_j = 0.5;
    return s;
}

void validate_level(const AtomSpecies& species, double f, double m) {
    validate_species(species);
    branch_sign(species, f);
    if (!is_half_integral(m) || !is_integral(f - m))
        throw DomainError("m must differ from F by an integer");
    if (std::abs(m) > f + 1e-9)
        throw DomainError("|m| must not exceed F (F=" + std::to_string(f) +
                          ", m=" + std::to_string(m) + ")");
}

double field_parameter(const AtomSpecies& species, double b_gauss) {
    validate_species(species);
    // Electron and nuclear precession enter with opposite sign conventions.
    const double electron = -species.electron_moment_bohr / species.electron_j *
                            constants::mu_bohr_hz_per_gauss;
    return (electron + nuclear_shift_hz_per_gauss(species)) * b_gauss /
           species.hyperfine_splitting_hz;
}

double g_factor(const AtomSpecies& species, double f) {
    validate_species(species);
    const int sign = branch_sign(species, f);
    const double n = 2.0 * species.nuclear_spin + 1.0;
    const double electron = -species.electron_moment_bohr / species.electron_j *
                            constants::mu_bohr_hz_per_gauss;
    const double nuclear = nuclear_shift_hz_per_gauss(species);
    return (-nuclear + sign * (electron + nuclear) / n) / constants::mu_bohr_hz_per_gauss;
}

double breit_rabi_energy_hz(const AtomSpecies& species, double f, double m,
                            double b_gauss) {
    validate_level(species, f, m);
    if (b_gauss < 0.0) throw DomainError("field must be non-negative");
    const int sign = branch_sign(species, f);
    const double n = 2.0 * species.nuclear_spin + 1.0;
    const double nu = species.hyperfine_splitting_hz;
    const double x = field_parameter(species, b_gauss);
    // For the stretched m = -(I+1/2) state the radicand collapses to
    // (1 - x)^2; sqrt of the clamped value is its analytic continuation
    // |1 - x|. Roundoff can push the radicand epsilon-negative there.
    const double radicand = std::max(1.0 + 4.0 * m * x / n + x * x, 0.0);
    return -nu / (2.0 * n) - nuclear_shift_hz_per_gauss(species) * b_gauss * m +
           sign * 0.5 * nu * std::sqrt(radicand);
}

double transition_frequency_hz(const AtomSpecies& species, double f, double m,
                               double b_gauss) {
    validate_level(species, f, m);
    validate_level(species, f, m + 1.0);
    if (b_gauss < 0.0) throw DomainError("field must be non-negative");
    const int sign = branch_sign(species, f);
    const double n = 2.0 * species.nuclear_spin + 1.0;
    const double nu = species.hyperfine_splitting_hz;
    const double x = field_parameter(species, b_gauss);
    const double r_up = std::sqrt(std::max(1.0 + 4.0 * (m + 1.0) * x / n + x * x, 0.0));
    const double r_lo = std::sqrt(std::max(1.0 + 4.0 * m * x / n + x * x, 0.0));
    if (r_up + r_lo == 0.0) throw SingularError("degenerate radicands");
    // sqrt difference rewritten as (a^2 - b^2)/(a + b): avoids the 10-digit
    // cancellation between ~GHz energies that a naive difference would incur.
    const double sqrt_diff = (4.0 * x / n) / (r_up + r_lo);
    return -nuclear_shift_hz_per_gauss(species) * b_gauss + sign * 0.5 * nu * sqrt_diff;
}

double transition_frequency_second_order_hz(const AtomSpecies& species, double f,
                                            double m, double b_gauss) {
    validate_level(species, f, m);
    validate_level(species, f, m + 1.0);
    if (b_gauss < 0.0) throw DomainError("field must be non-negative");
    const int sign = branch_sign(species, f);
    const double n = 2.0 * species.nuclear_spin + 1.0;
    const double nu = species.hyperfine_splitting_hz;
    // Electron-only linear scale nu_x = nu_hfs * x / (2I+1); the nuclear term
    // stays linear and must not enter the squared correction.
    const double nu_x = nu * field_parameter(species, b_gauss) / n;
    return -nuclear_shift_hz_per_gauss(species) * b_gauss +
           sign * (nu_x - (2.0 * m + 1.0) * nu_x * nu_x / nu);
}

double larmor_frequency_hz(const AtomSpecies& species, double f, double b_gauss) {
    return g_factor(species, f) * constants::mu_bohr_hz_per_gauss * b_gauss;
}

double qz_splitting_hz(double nu_larmor_hz, double nu_hfs_hz) {
    if (!(nu_hfs_hz > 0.0)) throw DomainError("hyperfine splitting must be positive");
    return 2.0 * nu_larmor_hz * nu_larmor_hz / nu_hfs_hz;
}

} // namespace morsekit
