#pragma once

#include <string>

namespace morsekit {

/// Ground-state alkali atom: everything the hyperfine Zeeman structure needs.
/// Magnetic moments are signed and expressed in the conventional units
/// (electron moment in Bohr magnetons, nuclear moment in nuclear magnetons).
struct AtomSpecies {
    std::string name;
    double nuclear_spin = 0.0;          ///< I, half-integer or integer, > 0
    double hyperfine_splitting_hz = 0.0; ///< nu_hfs > 0
    double electron_moment_bohr = 0.0;   ///< mu_J in units of mu_B (signed)
    double nuclear_moment_nuclear = 0.0; ///< mu_I in units of mu_N (signed)
    double electron_j = 0.5;            ///< J of the ground term (1/2 for s-states)

    /// Hyperfine quantum numbers of the two ground-state manifolds.
    double f_upper() const { return nuclear_spin + electron_j; }
    double f_lower() const { return nuclear_spin - electron_j; }
};

/// Built-in cesium-133 preset (I = 7/2, nu_hfs = 9.1926 GHz,
/// mu_J = -1.0011596521869 mu_B, mu_I = +2.582025 mu_N).
AtomSpecies cesium();

/// Throws DomainError unless f is one of the two hyperfine manifolds and
/// |m| <= f (with m - f integral).
void validate_level(const AtomSpecies& species, double f, double m);

/// Dimensionless field parameter x(B) of the exact two-manifold
/// diagonalization; proportional to B (Gauss).
double field_parameter(const AtomSpecies& species, double b_gauss);

/// Lande factor of the hyperfine manifold f, signed (the lower manifold
/// precesses in the opposite sense).
double g_factor(const AtomSpecies& species, double f);

/// Exact magnetic energy E_{f,m}/h in Hz at field b_gauss >= 0.
/// The stretched state m = -(I+1/2) on the upper manifold is evaluated via
/// the analytic continuation |1 - x| of the collapsed radicand.
double breit_rabi_energy_hz(const AtomSpecies& species, double f, double m,
                            double b_gauss);

/// Exact transition frequency (E_{f,m+1} - E_{f,m})/h in Hz, evaluated in a
/// cancellation-free form. Requires -f <= m <= f-1.
double transition_frequency_hz(const AtomSpecies& species, double f, double m,
                               double b_gauss);

/// Second-order (in B) expansion of transition_frequency_hz: the linear
/// Zeeman term plus the quadratic correction that splits adjacent lines by
/// the m-independent amount 2 nu_x^2 / nu_hfs.
double transition_frequency_second_order_hz(const AtomSpecies& species, double f,
                                            double m, double b_gauss);

/// First-order Zeeman (Larmor) frequency g_F mu_B B / h in Hz, signed.
double larmor_frequency_hz(const AtomSpecies& species, double f, double b_gauss);

/// Quadratic Zeeman splitting between adjacent transition lines,
/// 2 nu_larmor^2 / nu_hfs. Requires nu_hfs > 0.
double qz_splitting_hz(double nu_larmor_hz, double nu_hfs_hz);

} // namespace morsekit
