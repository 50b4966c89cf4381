#pragma once

#include <vector>

namespace morsekit {

/// Diagonal of the ground-manifold density matrix, indexed m = -F .. F.
struct PopulationDistribution {
    double f = 0.0;                  ///< total angular momentum of the manifold
    std::vector<double> populations; ///< 2F+1 non-negative entries, m ascending

    std::size_t size() const { return populations.size(); }
    /// Population of sublevel m (m = -F .. F).
    double at_m(double m) const;
    double& at_m(double m);
    double sum() const;
};

/// Six-parameter cw spectrum model: geometric population family (n4, epsilon)
/// with total transverse linewidths Gamma_com + pump profile and equidistant
/// line centers omega_center + omega_split*(m + 1/2). All widths are FWHM in
/// ordinary Hz; amplitude carries the arbitrary detector units.
struct SpinModel {
    double f = 4.0;
    double n4 = 1.0;          ///< population scale of the m = F level, >= 0
    double epsilon = 1.0;     ///< population ratio N_{m-1}/N_m, > 0
    double gamma_com_hz = 0.0;
    double gamma_pump_hz = 0.0;
    double omega_center_hz = 0.0;
    double omega_split_hz = 0.0;
    double amplitude = 1.0;   ///< overall response scale (arbitrary units)
};

/// Geometric populations N_m = n4 * epsilon^(F-m). Returns the absolute
/// distribution; its sum is the total atom number.
PopulationDistribution populations_from_epsilon(double f, double n4, double epsilon);

/// Copy of dist scaled to unit sum.
PopulationDistribution normalized(const PopulationDistribution& dist);

/// Orientation p = (1/F) sum_m m rho_mm of a normalized distribution,
/// in [-1, 1].
double orientation(const PopulationDistribution& dist);

/// Inverse of the epsilon -> orientation map (strictly decreasing), found by
/// bisection on epsilon in [eps_min, eps_max]. |p| = 1 is a limit of the
/// family: the clamped interval bound is returned (documented behavior);
/// |p| > 1 throws DomainError.
double epsilon_from_orientation(double f, double p, double eps_min = 1e-6,
                                double eps_max = 1e6);

/// Dimensionless pump-broadening profile of the (m+1, m) coherence,
/// (gamma_m + gamma_{m+1}) with gamma_m = (F-m)(F+1+m), normalized so the
/// (F, F-1) line has profile 1. For F = 4 this is (19 - 2m - m^2)/4.
double linewidth_profile(double f, double m);

/// Total FWHM of the (m+1, m) line: gamma_com + gamma_pump * profile(m).
double linewidth_hz(double f, double m, double gamma_com_hz, double gamma_pump_hz);

/// Center of the (m+1, m) line: omega_center + omega_split * (m + 1/2).
double resonance_frequency_hz(double f, double m, double omega_center_hz,
                              double omega_split_hz);

/// Transverse coupling strength C(F, m) = sqrt(F(F+1) - m(m+1)); the
/// spectral weight of a line is C^2.
double coupling_coefficient(double f, double m);

/// Absolute populations of the model (sum = total atom number).
PopulationDistribution model_populations(const SpinModel& model);

/// Total atom number n4 * sum_k epsilon^k of the model.
double total_atoms(const SpinModel& model);

/// Orientation of the model's population family.
double model_orientation(const SpinModel& model);

} // namespace morsekit
