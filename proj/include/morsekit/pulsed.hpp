#pragma once

#include <complex>
#include <vector>

#include "morsekit/spectrum.hpp"

namespace morsekit {

/// One segment of a periodic pulse cycle. gamma_total_hz is the total
/// transverse decay (FWHM, ordinary Hz) active during the segment.
struct PulseSegment {
    double duration_s = 0.0;
    double gamma_total_hz = 0.0;
    bool drive_on = true;      ///< RF drive applied during the segment
    bool probe_window = false; ///< segment contributes to the measured average
};

/// Periodic drive/decay schedule for the two-level (m=F-1, m=F) coherence.
/// The drive strength chi and the constant population difference delta_rho
/// set the response scale; spectra are quadratic in chi * delta_rho.
struct PulseSchedule {
    std::vector<PulseSegment> segments;
    double chi_rad_s = 1.0;     ///< drive coupling (rad/s)
    double delta_rho = 1.0;     ///< rho_FF - rho_{F-1,F-1}, held constant
    double resonance_hz = 0.0;  ///< two-level transition frequency
    int cycles_per_point = 1;   ///< extra full cycles averaged per grid point
    int max_cycles = 20000;     ///< iteration cap of the fixed-point detector

    double period_s() const;
};

/// Throws DomainError on empty schedules, non-positive durations, negative
/// decay rates, missing probe windows, or cycles_per_point < 1.
void validate_schedule(const PulseSchedule& schedule);

/// Coherence after evolving for t seconds under constant detuning
/// delta_rad_s, decay gamma_rad_s (amplitude decay rate Gamma/2 applied
/// internally), and drive chi_rad_s:
///   rho(t) = rho0 e^{lambda t} + i chi delta_rho t phi1(lambda t),
///   lambda = i delta - gamma/2,
/// the exact closed form (phi1(z) = (e^z - 1)/z, series-evaluated near 0, so
/// the drive term degrades gracefully to i chi delta_rho t at lambda = 0).
std::complex<double> evolve_coherence(std::complex<double> rho0, double delta_rad_s,
                                      double gamma_rad_s, double chi_rad_s,
                                      double delta_rho, double t_s);

/// Cycle-start coherence of the periodic steady state at detuning
/// delta_rad_s, from the closed-form fixed point rho* = b / (1 - A) of the
/// one-period affine map rho -> A rho + b. Throws SingularError when the
/// map is (numerically) the identity.
std::complex<double> periodic_steady_state(const PulseSchedule& schedule,
                                           double delta_rad_s);

/// Same fixed point found by iterating the map from rho = 0 until two
/// consecutive cycle-start coherences differ by less than
/// 1e-10 * |chi * delta_rho|; mirrors the lab's transient settling and
/// cross-checks the closed form. Throws ConvergenceError at the cycle cap.
/// Optional outputs: iteration count and final update size.
std::complex<double> periodic_steady_state_iterated(const PulseSchedule& schedule,
                                                    double delta_rad_s,
                                                    int* cycles_out = nullptr,
                                                    double* last_delta_out = nullptr);

/// Time average of the coherence over the probe windows of one
/// steady-state cycle (exact per-segment integrals, no time stepping).
std::complex<double> probe_average(const PulseSchedule& schedule, double delta_rad_s);

/// Lock-in power spectrum of the pulsed experiment: for each grid frequency,
/// |probe-window average of the steady-state quadrature pair|^2.
SpectrumTrace pulsed_mors(const PulseSchedule& schedule,
                          const std::vector<double>& omega_grid_hz);

/// Per-frequency convergence diagnostics of the iterative detector.
struct PulsedDiagnostics {
    std::vector<double> frequency_hz;
    std::vector<int> cycles;
    std::vector<double> last_delta;
};

/// pulsed_mors plus the iterative fixed-point diagnostics per frequency.
SpectrumTrace pulsed_mors_diagnosed(const PulseSchedule& schedule,
                                    const std::vector<double>& omega_grid_hz,
                                    PulsedDiagnostics& diagnostics);

/// Area/width summary of a single-feature power trace: trapezoidal area,
/// FWHM of the dominant feature (half-maximum crossings nearest the peak,
/// linearly interpolated), and the scale proxy sqrt(area * width) that
/// tracks the collective spin. Throws EstimationError when no peak is
/// identifiable.
struct AreaWidthEstimate {
    double area = 0.0;       ///< integral of value over frequency
    double width_hz = 0.0;   ///< full width at half maximum of the envelope
    double proxy = 0.0;      ///< sqrt(area * width)
    double peak_hz = 0.0;    ///< frequency of the maximum
    double peak_value = 0.0; ///< maximum value
};

AreaWidthEstimate area_width_estimate(const SpectrumTrace& trace);

} // namespace morsekit
