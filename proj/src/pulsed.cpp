#include "morsekit/pulsed.hpp"

#include <cmath>
#include <cstddef>

#include "morsekit/errors.hpp"
#include "morsekit/parallel.hpp"
#include "morsekit/units.hpp"

namespace morsekit {
namespace {

using cplx = std::complex<double>;

/// phi1(z) = (e^z - 1)/z, the relative first-order exponential remainder.
/// Taylor fallback keeps full precision where the direct form cancels.
cplx phi1(cplx z) {
    if (std::abs(z) < 1e-6) return 1.0 + z / 2.0 + z * z / 6.0;
    return (std::exp(z) - 1.0) / z;
}

/// phi2(z) = (e^z - 1 - z)/z^2, the second-order remainder; integrates phi1.
cplx phi2(cplx z) {
    if (std::abs(z) < 1e-4) return 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0;
    return (std::exp(z) - 1.0 - z) / (z * z);
}

/// One-period affine map rho -> a * rho + b at a given detuning: product of
/// the per-segment closed forms in schedule order.
struct CycleMap {
    cplx a;
    cplx b;
};

cplx segment_lambda(const PulseSegment& seg, double delta_rad_s) {
    // Amplitude decay rate is Gamma/2 with Gamma = 2 pi * FWHM(Hz).
    return cplx(-constants::pi * seg.gamma_total_hz, delta_rad_s);
}

CycleMap cycle_map(const PulseSchedule& schedule, double delta_rad_s) {
    CycleMap map{1.0, 0.0};
    for (const PulseSegment& seg : schedule.segments) {
        const cplx lam = segment_lambda(seg, delta_rad_s);
        const cplx growth = std::exp(lam * seg.duration_s);
        const cplx drive = seg.drive_on
                               ? cplx(0.0, schedule.chi_rad_s * schedule.delta_rho) *
                                     seg.duration_s * phi1(lam * seg.duration_s)
                               : cplx(0.0);
        map.a *= growth;
        map.b = growth * map.b + drive;
    }
    return map;
}

} // namespace

double PulseSchedule::period_s() const {
    double total = 0.0;
    for (const PulseSegment& seg : segments) total += seg.duration_s;
    return total;
}

void validate_schedule(const PulseSchedule& schedule) {
    if (schedule.segments.empty()) throw DomainError("schedule has no segments");
    bool has_probe = false;
    for (const PulseSegment& seg : schedule.segments) {
        if (!(seg.duration_s > 0.0)) throw DomainError("segment durations must be positive");
        if (seg.gamma_total_hz < 0.0) throw DomainError("segment decay must be non-negative");
        has_probe = has_probe || seg.probe_window;
    }
    if (!has_probe) throw DomainError("schedule needs at least one probe window");
    if (schedule.cycles_per_point < 1) throw DomainError("cycles_per_point must be >= 1");
    if (schedule.max_cycles < 1) throw DomainError("max_cycles must be >= 1");
}

std::complex<double> evolve_coherence(std::complex<double> rho0, double delta_rad_s,
                                      double gamma_rad_s, double chi_rad_s,
                                      double delta_rho, double t_s) {
    if (t_s < 0.0) throw DomainError("evolution time must be non-negative");
    if (gamma_rad_s < 0.0) throw DomainError("decay rate must be non-negative");
    const cplx lam(-0.5 * gamma_rad_s, delta_rad_s);
    return rho0 * std::exp(lam * t_s) +
           cplx(0.0, chi_rad_s * delta_rho) * t_s * phi1(lam * t_s);
}

std::complex<double> periodic_steady_state(const PulseSchedule& schedule,
                                           double delta_rad_s) {
    validate_schedule(schedule);
    const CycleMap map = cycle_map(schedule, delta_rad_s);
    const cplx one_minus_a = 1.0 - map.a;
    if (std::abs(one_minus_a) < 1e-12 * (1.0 + std::abs(map.a)))
        throw SingularError("one-period map has no isolated fixed point "
                            "(undamped cycle at commensurate detuning)");
    return map.b / one_minus_a;
}

std::complex<double> periodic_steady_state_iterated(const PulseSchedule& schedule,
                                                    double delta_rad_s, int* cycles_out,
                                                    double* last_delta_out) {
    validate_schedule(schedule);
    const CycleMap map = cycle_map(schedule, delta_rad_s);
    const double tolerance =
        1e-10 * std::abs(schedule.chi_rad_s * schedule.delta_rho);
    cplx rho = 0.0;
    double delta = 0.0;
    for (int cycle = 1; cycle <= schedule.max_cycles; ++cycle) {
        const cplx next = map.a * rho + map.b;
        delta = std::abs(next - rho);
        rho = next;
        if (delta < tolerance) {
            if (cycles_out) *cycles_out = cycle;
            if (last_delta_out) *last_delta_out = delta;
            return rho;
        }
    }
    throw ConvergenceError("periodic steady state not reached", schedule.max_cycles,
                           delta);
}

std::complex<double> probe_average(const PulseSchedule& schedule, double delta_rad_s) {
    const cplx start = periodic_steady_state(schedule, delta_rad_s);
    cplx rho = start;
    cplx integral = 0.0;
    double probe_time = 0.0;
    for (const PulseSegment& seg : schedule.segments) {
        const cplx lam = segment_lambda(seg, delta_rad_s);
        const double d = seg.duration_s;
        const cplx drive = seg.drive_on
                               ? cplx(0.0, schedule.chi_rad_s * schedule.delta_rho)
                               : cplx(0.0);
        if (seg.probe_window) {
            // Exact segment integral: int_0^d rho(t) dt for
            // rho(t) = rho_in e^{lambda t} + drive * t * phi1(lambda t).
            integral += rho * d * phi1(lam * d) + drive * d * d * phi2(lam * d);
            probe_time += d;
        }
        rho = rho * std::exp(lam * d) + drive * d * phi1(lam * d);
    }
    return integral / probe_time;
}

SpectrumTrace pulsed_mors(const PulseSchedule& schedule,
                          const std::vector<double>& omega_grid_hz) {
    validate_schedule(schedule);
    if (omega_grid_hz.empty()) throw DomainError("frequency grid must be non-empty");
    SpectrumTrace trace;
    trace.kind = TraceKind::mors_power;
    trace.frequency_hz = omega_grid_hz;
    trace.value.resize(omega_grid_hz.size());
    parallel_for(omega_grid_hz.size(), [&](std::size_t i) {
        const double delta =
            units::rad_s_from_hz(omega_grid_hz[i] - schedule.resonance_hz);
        trace.value[i] = std::norm(probe_average(schedule, delta));
    });
    return trace;
}

SpectrumTrace pulsed_mors_diagnosed(const PulseSchedule& schedule,
                                    const std::vector<double>& omega_grid_hz,
                                    PulsedDiagnostics& diagnostics) {
    SpectrumTrace trace = pulsed_mors(schedule, omega_grid_hz);
    diagnostics.frequency_hz = omega_grid_hz;
    diagnostics.cycles.assign(omega_grid_hz.size(), 0);
    diagnostics.last_delta.assign(omega_grid_hz.size(), 0.0);
    parallel_for(omega_grid_hz.size(), [&](std::size_t i) {
        const double delta =
            units::rad_s_from_hz(omega_grid_hz[i] - schedule.resonance_hz);
        int cycles = 0;
        double last = 0.0;
        periodic_steady_state_iterated(schedule, delta, &cycles, &last);
        diagnostics.cycles[i] = cycles;
        diagnostics.last_delta[i] = last;
    });
    return trace;
}

AreaWidthEstimate area_width_estimate(const SpectrumTrace& trace) {
    const std::size_t n = trace.size();
    if (n < 3 || trace.value.size() != n)
        throw EstimationError("trace too short for an area/width estimate");
    std::size_t peak = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (trace.value[i] > trace.value[peak]) peak = i;
    const double peak_value = trace.value[peak];
    if (!(peak_value > 0.0)) throw EstimationError("no identifiable peak (flat trace)");

    const double half = 0.5 * peak_value;
    // Envelope FWHM: first half-maximum crossing on each side walking away
    // from the peak, linearly interpolated between samples.
    double left = trace.frequency_hz.front();
    bool found_left = false;
    for (std::size_t i = peak; i-- > 0;) {
        if (trace.value[i] < half) {
            const double f0 = trace.frequency_hz[i], f1 = trace.frequency_hz[i + 1];
            const double v0 = trace.value[i], v1 = trace.value[i + 1];
            left = f0 + (half - v0) / (v1 - v0) * (f1 - f0);
            found_left = true;
            break;
        }
    }
    double right = trace.frequency_hz.back();
    bool found_right = false;
    for (std::size_t i = peak + 1; i < n; ++i) {
        if (trace.value[i] < half) {
            const double f0 = trace.frequency_hz[i - 1], f1 = trace.frequency_hz[i];
            const double v0 = trace.value[i - 1], v1 = trace.value[i];
            right = f0 + (half - v0) / (v1 - v0) * (f1 - f0);
            found_right = true;
            break;
        }
    }
    if (!found_left && !found_right)
        throw EstimationError("no half-maximum crossings: peak not resolved by the grid");

    AreaWidthEstimate est;
    est.peak_hz = trace.frequency_hz[peak];
    est.peak_value = peak_value;
    est.width_hz = right - left;
    double area = 0.0;
    for (std::size_t i = 1; i < n; ++i)
        area += 0.5 * (trace.value[i] + trace.value[i - 1]) *
                (trace.frequency_hz[i] - trace.frequency_hz[i - 1]);
    est.area = area;
    est.proxy = std::sqrt(std::max(est.area * est.width_hz, 0.0));
    return est;
}

} // namespace morsekit
