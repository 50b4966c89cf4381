#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "morsekit/errors.hpp"
#include "morsekit/spectrum.hpp"

using namespace morsekit;

namespace {

SpinModel resolved_model() {
    SpinModel model;
    model.f = 4;
    model.n4 = 0.02;
    model.epsilon = 0.8;
    model.gamma_com_hz = 9.4;
    model.gamma_pump_hz = 0.0;
    model.omega_center_hz = 325250.0;
    model.omega_split_hz = 22.0;
    model.amplitude = 1.0;
    return model;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return grid;
}

} // namespace

TEST_CASE("trace kind names round trip") {
    for (TraceKind kind :
         {TraceKind::mors_power, TraceKind::quadrature_pair, TraceKind::dc_angle})
        CHECK(trace_kind_from_string(to_string(kind)) == kind);
    CHECK_THROWS_AS(trace_kind_from_string("bogus"), DomainError);
}

TEST_CASE("an isolated line is a Lorentzian of the expected height and width") {
    SpinModel model = resolved_model();
    model.epsilon = 1e-9; // only the (4,3) line survives
    model.omega_split_hz = 0.0;
    const double center = model.omega_center_hz + 0.0; // split = 0
    const std::vector<double> grid = linspace(center - 200.0, center + 200.0, 4001);
    const SpectrumTrace trace = mors(model, grid);

    // peak value = amplitude * (C^2 * delta_rho / (Gamma/2))^2 with
    // C^2 = 8 and delta_rho ~= n4.
    const double expected_peak =
        std::pow(8.0 * model.n4 / (model.gamma_com_hz / 2.0), 2.0);
    const double peak = *std::max_element(trace.value.begin(), trace.value.end());
    CHECK(peak == doctest::Approx(expected_peak).epsilon(1e-4));

    // half maximum at +/- Gamma/2
    auto value_at = [&](double f) {
        std::size_t best = 0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (std::abs(grid[i] - f) < std::abs(grid[best] - f)) best = i;
        return trace.value[best];
    };
    CHECK(value_at(center + model.gamma_com_hz / 2.0) ==
          doctest::Approx(peak / 2.0).epsilon(0.02));
    CHECK(value_at(center - model.gamma_com_hz / 2.0) ==
          doctest::Approx(peak / 2.0).epsilon(0.02));
}

TEST_CASE("synthesized power traces are non-negative and finite") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        SpinModel model = resolved_model();
        model.epsilon = 0.05 + 2.0 * uniform(rng);
        model.gamma_com_hz = 1.0 + 30.0 * uniform(rng);
        model.gamma_pump_hz = 10.0 * uniform(rng);
        model.omega_split_hz = 40.0 * (uniform(rng) - 0.5);
        const SpectrumTrace trace = mors(model, default_grid(model, 401));
        for (double v : trace.value) {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
        }
    }
}

TEST_CASE("MORS scales as atom number squared and linearly in amplitude") {
    SpinModel model = resolved_model();
    const std::vector<double> grid = default_grid(model, 501);
    const SpectrumTrace base = mors(model, grid);

    SpinModel tripled = model;
    tripled.n4 *= 3.0;
    const SpectrumTrace big = mors(tripled, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(big.value[i] == doctest::Approx(9.0 * base.value[i]).epsilon(1e-12));

    SpinModel doubled_amp = model;
    doubled_amp.amplitude *= 2.0;
    const SpectrumTrace bright = mors(doubled_amp, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(bright.value[i] == doctest::Approx(2.0 * base.value[i]).epsilon(1e-12));
}

TEST_CASE("power trace is the squared magnitude of the complex response") {
    const SpinModel model = resolved_model();
    const std::vector<double> grid = default_grid(model, 301);
    const SpectrumTrace trace = mors(model, grid);
    const ComplexResponse response = mors_response(model, grid);
    REQUIRE(response.size() == trace.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(trace.value[i] ==
              doctest::Approx(model.amplitude * std::norm(response.amplitude[i]))
                  .epsilon(1e-12));
}

TEST_CASE("flat ladder produces an identically zero spectrum") {
    SpinModel model = resolved_model();
    model.epsilon = 1.0;
    const SpectrumTrace trace = mors(model, default_grid(model, 101));
    for (double v : trace.value) CHECK(v == 0.0);
}

TEST_CASE("unresolved limit equals the full line sum for arbitrary populations") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        SpinModel model;
        model.f = 4;
        model.gamma_com_hz = 5.0 + 45.0 * uniform(rng);
        model.gamma_pump_hz = 0.0;
        model.omega_center_hz = 1e5 + 3e5 * uniform(rng);
        model.omega_split_hz = 0.0;
        model.amplitude = 0.1 + 10.0 * uniform(rng);

        PopulationDistribution pops;
        pops.f = 4;
        pops.populations.resize(9);
        for (double& v : pops.populations) v = uniform(rng);

        double j_z = 0.0;
        double m = -4.0;
        for (double v : pops.populations) {
            j_z += m * v;
            m += 1.0;
        }

        const std::vector<double> grid =
            linspace(model.omega_center_hz - 10.0 * model.gamma_com_hz,
                     model.omega_center_hz + 10.0 * model.gamma_com_hz, 201);
        const SpectrumTrace full = mors(model, pops, grid);
        const SpectrumTrace collapsed =
            unresolved_mors(j_z, model.gamma_com_hz, model.omega_center_hz, grid,
                            model.amplitude);
        const double peak = *std::max_element(full.value.begin(), full.value.end());
        for (std::size_t i = 0; i < grid.size(); ++i)
            CHECK(std::abs(full.value[i] - collapsed.value[i]) <= 1e-10 * peak);
    }
}

TEST_CASE("dc Faraday angle is the weighted sublevel sum") {
    PopulationDistribution pops;
    pops.f = 4;
    pops.populations = {0, 0, 0, 0, 0, 0, 0, 1, 2}; // m = 3 and m = 4
    CHECK(dc_faraday(pops) == doctest::Approx(3.0 + 8.0));
    CHECK(dc_faraday(pops, 0.5) == doctest::Approx(5.5));

    SpinModel model = resolved_model();
    model.amplitude = 2.0;
    const PopulationDistribution mp = model_populations(model);
    double expected = 0.0;
    double m = -4.0;
    for (double v : mp.populations) {
        expected += m * v;
        m += 1.0;
    }
    CHECK(dc_faraday(model) == doctest::Approx(2.0 * expected).epsilon(1e-14));
}

TEST_CASE("synthesis rejects zero linewidths and bad grids") {
    SpinModel model = resolved_model();
    model.gamma_com_hz = 0.0;
    model.gamma_pump_hz = 0.0;
    CHECK_THROWS_AS(mors(model, linspace(1.0, 2.0, 3)), SingularError);

    SpinModel good = resolved_model();
    CHECK_THROWS_AS(mors(good, std::vector<double>{}), DomainError);

    SpinModel negative_amp = resolved_model();
    negative_amp.amplitude = -1.0;
    CHECK_THROWS_AS(mors(negative_amp, linspace(1.0, 2.0, 3)), DomainError);
}

TEST_CASE("steady-state coherence: convention and the on-resonance singularity") {
    SpinModel model = resolved_model();
    model.epsilon = 0.5;
    const PopulationDistribution pops = model_populations(model);
    const double m = 3.0;
    const double line = resonance_frequency_hz(4, m, model.omega_center_hz,
                                               model.omega_split_hz);
    // On resonance the response is purely along the drive quadrature with
    // magnitude C (N4 - N3) / (Gamma/2).
    const std::complex<double> on = steady_state_coherence(model, pops, m, line);
    const double delta_rho = pops.at_m(4) - pops.at_m(3);
    CHECK(std::abs(on) == doctest::Approx(coupling_coefficient(4, 3) * delta_rho /
                                          (model.gamma_com_hz / 2.0))
                              .epsilon(1e-12));

    SpinModel zero_width = model;
    zero_width.gamma_com_hz = 0.0;
    CHECK_THROWS_AS(steady_state_coherence(zero_width, pops, m, line), SingularError);
    // off resonance a zero-width line is fine
    CHECK_NOTHROW(steady_state_coherence(zero_width, pops, m, line + 1.0));
}

TEST_CASE("default grid spans the full line ladder") {
    const SpinModel model = resolved_model();
    const std::vector<double> grid = default_grid(model, 1001, 10.0);
    REQUIRE(grid.size() == 1001);
    const double lowest_line = model.omega_center_hz - 3.5 * model.omega_split_hz;
    const double highest_line = model.omega_center_hz + 3.5 * model.omega_split_hz;
    CHECK(grid.front() < lowest_line);
    CHECK(grid.back() > highest_line);
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
}
