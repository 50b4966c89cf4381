#include "morsekit/spin_model.hpp"

#include <cmath>
#include <string>

#include "morsekit/errors.hpp"

namespace morsekit {
namespace {

void validate_f(double f) {
    if (!(f > 0.0) || std::abs(2.0 * f - std::round(2.0 * f)) > 1e-9)
        throw DomainError("F must be a positive (half-)integer");
}

/// Index of sublevel m in an m-ascending vector of length 2F+1.
std::size_t index_of(double f, double m) {
    const double idx = m + f;
    if (idx < -1e-9 || idx > 2.0 * f + 1e-9 ||
        std::abs(idx - std::round(idx)) > 1e-9)
        throw DomainError("m out of range (F=" + std::to_string(f) +
                          ", m=" + std::to_string(m) + ")");
    return static_cast<std::size_t>(std::llround(idx));
}

void validate_transition(double f, double m) {
    validate_f(f);
    index_of(f, m);
    index_of(f, m + 1.0);
}

} // namespace

double PopulationDistribution::at_m(double m) const {
    return populations[index_of(f, m)];
}

double& PopulationDistribution::at_m(double m) {
    return populations[index_of(f, m)];
}

double PopulationDistribution::sum() const {
    double total = 0.0;
    for (double v : populations) total += v;
    return total;
}

PopulationDistribution populations_from_epsilon(double f, double n4, double epsilon) {
    validate_f(f);
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
    if (n4 < 0.0) throw DomainError("population scale must be non-negative");
    const std::size_t levels = static_cast<std::size_t>(std::llround(2.0 * f)) + 1;
    PopulationDistribution dist;
    dist.f = f;
    dist.populations.resize(levels);
    // Fill from m = F downwards so each entry is a single multiplication.
    double value = n4;
    for (std::size_t k = 0; k < levels; ++k) {
        dist.populations[levels - 1 - k] = value;
        value *= epsilon;
    }
    return dist;
}

PopulationDistribution normalized(const PopulationDistribution& dist) {
    const double total = dist.sum();
    if (!(total > 0.0)) throw DomainError("cannot normalize an empty distribution");
    PopulationDistribution out = dist;
    for (double& v : out.populations) v /= total;
    return out;
}

double orientation(const PopulationDistribution& dist) {
    validate_f(dist.f);
    if (dist.populations.size() !=
        static_cast<std::size_t>(std::llround(2.0 * dist.f)) + 1)
        throw DomainError("distribution size does not match F");
    double mean_m = 0.0;
    double m = -dist.f;
    for (double v : dist.populations) {
        mean_m += m * v;
        m += 1.0;
    }
    return mean_m / dist.f;
}

double epsilon_from_orientation(double f, double p, double eps_min, double eps_max) {
    validate_f(f);
    if (!(eps_min > 0.0) || !(eps_max > eps_min))
        throw DomainError("epsilon bracket must satisfy 0 < eps_min < eps_max");
    if (!std::isfinite(p) || std::abs(p) > 1.0)
        throw DomainError("orientation must lie in [-1, 1]");

    auto p_of = [f](double eps) {
        return orientation(normalized(populations_from_epsilon(f, 1.0, eps)));
    };
    // p(eps) is strictly decreasing; p = +/-1 are open limits of the family,
    // so out-of-bracket targets return the clamped bound (documented).
    if (p >= p_of(eps_min)) return eps_min;
    if (p <= p_of(eps_max)) return eps_max;

    // Bisect in log space: the family is geometric in epsilon.
    double lo = std::log(eps_min), hi = std::log(eps_max);
    for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (p_of(std::exp(mid)) > p)
            lo = mid;
        else
            hi = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

double linewidth_profile(double f, double m) {
    validate_transition(f, m);
    auto gamma = [f](double mm) { return (f - mm) * (f + 1.0 + mm); };
    return (gamma(m) + gamma(m + 1.0)) / (gamma(f - 1.0) + gamma(f));
}

double linewidth_hz(double f, double m, double gamma_com_hz, double gamma_pump_hz) {
    if (gamma_com_hz < 0.0 || gamma_pump_hz < 0.0)
        throw DomainError("linewidths must be non-negative");
    return gamma_com_hz + gamma_pump_hz * linewidth_profile(f, m);
}

double resonance_frequency_hz(double f, double m, double omega_center_hz,
                              double omega_split_hz) {
    validate_transition(f, m);
    return omega_center_hz + omega_split_hz * (m + 0.5);
}

double coupling_coefficient(double f, double m) {
    validate_transition(f, m);
    return std::sqrt(f * (f + 1.0) - m * (m + 1.0));
}

PopulationDistribution model_populations(const SpinModel& model) {
    return populations_from_epsilon(model.f, model.n4, model.epsilon);
}

double total_atoms(const SpinModel& model) {
    return model_populations(model).sum();
}

double model_orientation(const SpinModel& model) {
    return orientation(normalized(model_populations(model)));
}

} // namespace morsekit
