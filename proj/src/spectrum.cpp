#include "morsekit/spectrum.hpp"

#include <cmath>
#include <cstddef>

#include "morsekit/errors.hpp"
#include "morsekit/parallel.hpp"

namespace morsekit {
namespace {

/// Line parameters cached once per synthesis: center, half-width, and
/// weight C^2 * (N_{m+1} - N_m) of each of the 2F transitions.
struct LineSet {
    std::vector<double> center_hz;
    std::vector<double> half_width_hz;
    std::vector<double> weight;
};

LineSet build_lines(const SpinModel& model, const PopulationDistribution& pops,
                    bool require_positive_width) {
    if (pops.f != model.f) throw DomainError("population F does not match model F");
    const std::size_t lines = pops.size() - 1;
    if (lines == 0) throw DomainError("model needs at least two sublevels");
    LineSet set;
    set.center_hz.resize(lines);
    set.half_width_hz.resize(lines);
    set.weight.resize(lines);
    for (std::size_t k = 0; k < lines; ++k) {
        const double m = -model.f + static_cast<double>(k);
        const double c = coupling_coefficient(model.f, m);
        const double width =
            linewidth_hz(model.f, m, model.gamma_com_hz, model.gamma_pump_hz);
        if (require_positive_width && !(width > 0.0))
            throw SingularError("zero linewidth at synthesis (line m=" +
                                std::to_string(m) + ")");
        set.center_hz[k] =
            resonance_frequency_hz(model.f, m, model.omega_center_hz, model.omega_split_hz);
        set.half_width_hz[k] = 0.5 * width;
        set.weight[k] = c * c * (pops.populations[k + 1] - pops.populations[k]);
    }
    return set;
}

std::complex<double> line_sum(const LineSet& set, double omega_hz) {
    std::complex<double> total = 0.0;
    for (std::size_t k = 0; k < set.center_hz.size(); ++k) {
        const std::complex<double> denom(-set.half_width_hz[k],
                                         set.center_hz[k] - omega_hz);
        total += set.weight[k] / denom;
    }
    return total;
}

void validate_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw DomainError("frequency grid must be non-empty");
    for (double f : grid)
        if (!std::isfinite(f)) throw DomainError("frequency grid must be finite");
}

} // namespace

std::string to_string(TraceKind kind) {
    switch (kind) {
        case TraceKind::mors_power: return "mors_power";
        case TraceKind::quadrature_pair: return "quadrature_pair";
        case TraceKind::dc_angle: return "dc_angle";
    }
    throw DomainError("unknown trace kind");
}

TraceKind trace_kind_from_string(const std::string& name) {
    if (name == "mors_power") return TraceKind::mors_power;
    if (name == "quadrature_pair") return TraceKind::quadrature_pair;
    if (name == "dc_angle") return TraceKind::dc_angle;
    throw DomainError("unknown trace kind: " + name);
}

std::complex<double> steady_state_coherence(const SpinModel& model,
                                            const PopulationDistribution& pops,
                                            double m, double omega_hz) {
    if (pops.f != model.f) throw DomainError("population F does not match model F");
    const double c = coupling_coefficient(model.f, m);
    const double width = linewidth_hz(model.f, m, model.gamma_com_hz, model.gamma_pump_hz);
    const double center =
        resonance_frequency_hz(model.f, m, model.omega_center_hz, model.omega_split_hz);
    if (width == 0.0 && center == omega_hz)
        throw SingularError("zero linewidth driven on resonance");
    const double delta_pop = pops.at_m(m + 1.0) - pops.at_m(m);
    return c * delta_pop / std::complex<double>(-0.5 * width, center - omega_hz);
}

ComplexResponse mors_response(const SpinModel& model,
                              const PopulationDistribution& pops,
                              const std::vector<double>& omega_grid_hz) {
    validate_grid(omega_grid_hz);
    const LineSet lines = build_lines(model, pops, /*require_positive_width=*/true);
    ComplexResponse out;
    out.frequency_hz = omega_grid_hz;
    out.amplitude.resize(omega_grid_hz.size());
    parallel_for(omega_grid_hz.size(), [&](std::size_t i) {
        out.amplitude[i] = line_sum(lines, omega_grid_hz[i]);
    });
    return out;
}

ComplexResponse mors_response(const SpinModel& model,
                              const std::vector<double>& omega_grid_hz) {
    return mors_response(model, model_populations(model), omega_grid_hz);
}

SpectrumTrace mors(const SpinModel& model, const PopulationDistribution& pops,
                   const std::vector<double>& omega_grid_hz) {
    if (!(model.amplitude > 0.0)) throw DomainError("amplitude must be positive");
    const ComplexResponse response = mors_response(model, pops, omega_grid_hz);
    SpectrumTrace trace;
    trace.kind = TraceKind::mors_power;
    trace.frequency_hz = omega_grid_hz;
    trace.value.resize(omega_grid_hz.size());
    for (std::size_t i = 0; i < response.size(); ++i)
        trace.value[i] = model.amplitude * std::norm(response.amplitude[i]);
    return trace;
}

SpectrumTrace mors(const SpinModel& model, const std::vector<double>& omega_grid_hz) {
    return mors(model, model_populations(model), omega_grid_hz);
}

double dc_faraday(const PopulationDistribution& pops, double amplitude) {
    double weighted = 0.0;
    double m = -pops.f;
    for (double v : pops.populations) {
        weighted += m * v;
        m += 1.0;
    }
    return amplitude * weighted;
}

double dc_faraday(const SpinModel& model) {
    return dc_faraday(model_populations(model), model.amplitude);
}

SpectrumTrace unresolved_mors(double j_z, double gamma_com_hz, double omega_center_hz,
                              const std::vector<double>& omega_grid_hz,
                              double amplitude) {
    validate_grid(omega_grid_hz);
    if (!(gamma_com_hz > 0.0)) throw DomainError("common linewidth must be positive");
    if (!(amplitude > 0.0)) throw DomainError("amplitude must be positive");
    SpectrumTrace trace;
    trace.kind = TraceKind::mors_power;
    trace.frequency_hz = omega_grid_hz;
    trace.value.resize(omega_grid_hz.size());
    // The 2F-line sum telescopes to a single Lorentzian weighted by
    // 2 Jz = 2 sum_m m N_m when all centers and widths coincide.
    for (std::size_t i = 0; i < omega_grid_hz.size(); ++i) {
        const std::complex<double> denom(-0.5 * gamma_com_hz,
                                         omega_center_hz - omega_grid_hz[i]);
        trace.value[i] = amplitude * std::norm(2.0 * j_z / denom);
    }
    return trace;
}

std::vector<double> default_grid(const SpinModel& model, std::size_t points,
                                 double span_factor) {
    if (points < 2) throw DomainError("grid needs at least two points");
    double widest = 0.0;
    for (double m = -model.f; m < model.f - 0.5; m += 1.0)
        widest = std::max(widest,
                          linewidth_hz(model.f, m, model.gamma_com_hz, model.gamma_pump_hz));
    const double span =
        span_factor * std::max(widest, model.f * std::abs(model.omega_split_hz));
    if (!(span > 0.0)) throw DomainError("degenerate grid span");
    std::vector<double> grid(points);
    const double lo = model.omega_center_hz - span;
    const double step = 2.0 * span / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = lo + step * static_cast<double>(i);
    return grid;
}

} // namespace morsekit
