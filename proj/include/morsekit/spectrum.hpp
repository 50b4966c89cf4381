#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "morsekit/spin_model.hpp"

namespace morsekit {

enum class TraceKind { mors_power, quadrature_pair, dc_angle };

std::string to_string(TraceKind kind);
TraceKind trace_kind_from_string(const std::string& name);

/// Sampled spectrum: (frequency, value) pairs plus free-form annotations.
/// Synthesized mors_power traces are non-negative; ingested experimental
/// traces may carry negative noise samples.
struct SpectrumTrace {
    std::vector<double> frequency_hz;
    std::vector<double> value;
    TraceKind kind = TraceKind::mors_power;
    std::map<std::string, std::string> meta;

    std::size_t size() const { return frequency_hz.size(); }
};

/// Complex lock-in response A(omega): in-phase and quadrature components per
/// frequency; |A|^2 reproduces the mors_power value on the same grid.
struct ComplexResponse {
    std::vector<double> frequency_hz;
    std::vector<std::complex<double>> amplitude;

    std::size_t size() const { return frequency_hz.size(); }
};

/// Steady-state transverse coherence of the (m+1, m) two-level subsystem
/// driven at omega_hz: C(F,m) * (N_{m+1} - N_m) / (i(omega_line - omega) -
/// Gamma/2), up to the model's common prefactor. Populations are the
/// absolute ones of `pops`. Throws SingularError for a zero-width line
/// driven exactly on resonance.
std::complex<double> steady_state_coherence(const SpinModel& model,
                                            const PopulationDistribution& pops,
                                            double m, double omega_hz);

/// Coherent line sum A(omega) = sum_m C^2(F,m) (N_{m+1} - N_m) /
/// (i(omega_m - omega) - Gamma_m/2) over the 2F transitions, for absolute
/// populations `pops` and the width/center ladder of `model`.
ComplexResponse mors_response(const SpinModel& model,
                              const PopulationDistribution& pops,
                              const std::vector<double>& omega_grid_hz);
ComplexResponse mors_response(const SpinModel& model,
                              const std::vector<double>& omega_grid_hz);

/// Power spectrum amplitude * |A(omega)|^2 (lock-in sum of squared
/// quadratures, arbitrary units squared). All 2F linewidths must be
/// positive at synthesis time.
SpectrumTrace mors(const SpinModel& model, const PopulationDistribution& pops,
                   const std::vector<double>& omega_grid_hz);
SpectrumTrace mors(const SpinModel& model, const std::vector<double>& omega_grid_hz);

/// DC Faraday rotation angle theta = amplitude * N * F * p =
/// amplitude * sum_m m N_m (arbitrary angle units, amplitude default 1).
double dc_faraday(const PopulationDistribution& pops, double amplitude = 1.0);
double dc_faraday(const SpinModel& model);

/// Single-Lorentzian power spectrum of the fully unresolved limit
/// (omega_split = 0, Gamma_pump = 0): amplitude * |2 Jz /
/// (i(omega_center - omega) - Gamma_com/2)|^2 with Jz = sum_m m N_m.
/// With that convention it coincides with mors() exactly, for any
/// population distribution of the same Jz.
SpectrumTrace unresolved_mors(double j_z, double gamma_com_hz, double omega_center_hz,
                              const std::vector<double>& omega_grid_hz,
                              double amplitude = 1.0);

/// Uniform grid of `points` frequencies spanning omega_center +/-
/// span_factor * max(widest line, F * |omega_split|).
std::vector<double> default_grid(const SpinModel& model, std::size_t points = 2001,
                                 double span_factor = 10.0);

} // namespace morsekit
