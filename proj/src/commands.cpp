#include "morsekit/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "morsekit/errors.hpp"
#include "morsekit/noise.hpp"
#include "morsekit/spectrum.hpp"
#include "morsekit/trace_io.hpp"
#include "morsekit/units.hpp"
#include "morsekit/version.hpp"

namespace morsekit {
namespace {

using nlohmann::ordered_json;

std::optional<std::uint64_t> effective_seed(const RunConfig& config,
                                            const CommandOptions& options) {
    if (options.seed_override) return options.seed_override;
    return config.noise.seed;
}

std::filesystem::path prepare_out_dir(const CommandOptions& options) {
    std::filesystem::create_directories(options.out_dir);
    return options.out_dir;
}

std::string emit(const std::filesystem::path& path, const std::string& bytes) {
    const std::string digest = write_file(path, bytes);
    std::cout << "wrote " << path.string() << " (fnv1a " << digest << ")\n";
    return digest;
}

std::string emit(const std::filesystem::path& path, const SpectrumTrace& trace) {
    return emit(path, to_csv(trace));
}

ordered_json provenance(const RunConfig& config, const std::string& command,
                        const std::optional<std::uint64_t>& seed) {
    ordered_json j;
    j["tool"] = "morsekit";
    j["version"] = std::string(version);
    j["schema_version"] = config.schema_version;
    j["command"] = command;
    j["config"] = {{"origin", config.origin}, {"digest", config.digest}};
    if (seed)
        j["seed"] = *seed;
    else
        j["seed"] = nullptr;
    return j;
}

void write_manifest(const RunConfig& config, const CommandOptions& options,
                    const std::string& command, const std::optional<std::uint64_t>& seed,
                    const std::vector<std::pair<std::string, std::string>>& outputs) {
    ordered_json j = provenance(config, command, seed);
    ordered_json files = ordered_json::object();
    for (const auto& [name, digest] : outputs) files[name] = digest;
    j["outputs"] = files;
    emit(options.out_dir / config.output.manifest, j.dump(2) + "\n");
}

ordered_json named_parameters(const std::array<double, fit_param_count>& values) {
    ordered_json j = ordered_json::object();
    for (std::size_t i = 0; i < fit_param_count; ++i)
        j[to_string(static_cast<FitParam>(i))] = values[i];
    return j;
}

} // namespace

int cmd_simulate(const RunConfig& config, const CommandOptions& options) {
    const std::vector<double> grid = config.grid.build(config.model);
    SpectrumTrace trace = mors(config.model, grid);

    const std::optional<std::uint64_t> seed = effective_seed(config, options);
    if (config.noise.kind == NoiseSpec::Kind::gaussian) {
        if (!seed)
            throw ConfigError(config.origin +
                              ": gaussian noise requires noise.seed (or --seed)");
        trace = add_noise(trace, config.noise.level, *seed);
        trace.meta["seed"] = std::to_string(*seed);
    }
    trace.meta["config"] = config.digest;

    const std::filesystem::path out = prepare_out_dir(options);
    const std::string digest = emit(out / config.output.trace, trace);
    write_manifest(config, options, "simulate", seed, {{config.output.trace, digest}});

    const auto peak = std::max_element(trace.value.begin(), trace.value.end());
    std::cout << "simulate: " << trace.size() << " points, peak " << *peak << " at "
              << trace.frequency_hz[static_cast<std::size_t>(
                     peak - trace.value.begin())]
              << " Hz\n";
    return 0;
}

int cmd_fit(const RunConfig& config, const CommandOptions& options) {
    if (!options.trace_path)
        throw ConfigError("fit requires --trace <csv> with the measured spectrum");
    const std::string trace_bytes = read_file(*options.trace_path);
    const SpectrumTrace trace = parse_csv(trace_bytes);

    FitProblem problem;
    if (config.fit.auto_init) {
        problem = initialize(trace, config.model.f,
                             config.species.hyperfine_splitting_hz);
    } else {
        problem.f = config.model.f;
    }
    problem = config.fit.apply(problem);

    const FitResult result = fit(trace, problem);

    SpectrumTrace model_curve;
    model_curve.frequency_hz = trace.frequency_hz;
    model_curve.value = evaluate_model(problem.f, result.parameters, trace.frequency_hz);
    model_curve.meta["config"] = config.digest;
    SpectrumTrace residual;
    residual.frequency_hz = trace.frequency_hz;
    residual.value.resize(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i)
        residual.value[i] = trace.value[i] - model_curve.value[i];
    residual.meta["config"] = config.digest;

    const std::filesystem::path out = prepare_out_dir(options);
    const std::string model_digest = emit(out / config.output.model_curve, model_curve);
    const std::string residual_digest = emit(out / config.output.residual, residual);

    ordered_json report = provenance(config, "fit", std::nullopt);
    report["trace"] = {{"path", options.trace_path->string()},
                       {"digest", fnv1a_hex(trace_bytes)},
                       {"points", trace.size()}};
    ordered_json free_list = ordered_json::array();
    for (std::size_t i = 0; i < fit_param_count; ++i)
        if (problem.free[i]) free_list.push_back(to_string(static_cast<FitParam>(i)));
    report["problem"] = {{"f", problem.f},
                         {"free", free_list},
                         {"start", named_parameters(problem.start)},
                         {"poisson_weights", problem.poisson_weights},
                         {"parametrize_orientation", problem.parametrize_orientation},
                         {"restarts", problem.restarts}};
    report["result"] = {{"converged", result.converged},
                        {"iterations", result.iterations},
                        {"restarts_used", result.restarts_used},
                        {"residual_norm", result.residual_norm},
                        {"relative_residual", result.relative_residual},
                        {"parameters", named_parameters(result.parameters)},
                        {"uncertainty", named_parameters(result.uncertainty)},
                        {"orientation", result.orientation},
                        {"j_z", result.j_z},
                        {"n_rel", result.n_rel},
                        {"line_centers_hz", result.line_centers_hz},
                        {"line_widths_hz", result.line_widths_hz},
                        {"sensitivity_condition", result.sensitivity_condition},
                        {"degenerate", result.degenerate},
                        {"message", result.message}};
    const std::string report_bytes = report.dump(2) + "\n";
    const std::string report_digest = emit(out / config.output.report, report_bytes);
    write_manifest(config, options, "fit", std::nullopt,
                   {{config.output.model_curve, model_digest},
                    {config.output.residual, residual_digest},
                    {config.output.report, report_digest}});

    std::cout << "fit: converged=" << (result.converged ? "true" : "false")
              << " iterations=" << result.iterations
              << " relative_residual=" << result.relative_residual
              << " p=" << result.orientation << " J_z=" << result.j_z << "\n";
    return result.converged ? 0 : 4;
}

int cmd_pulsed(const RunConfig& config, const CommandOptions& options) {
    if (!config.schedule_given || config.schedule.segments.empty())
        throw ConfigError(config.origin + ": pulsed requires at least one pulse.segment");
    validate_schedule(config.schedule);
    if (config.grid.automatic)
        throw ConfigError(config.origin +
                          ": pulsed requires an explicit grid.start_hz / grid.stop_hz");
    const std::vector<double> grid = config.grid.build(config.model);

    PulsedDiagnostics diagnostics;
    SpectrumTrace trace = pulsed_mors_diagnosed(config.schedule, grid, diagnostics);
    const AreaWidthEstimate summary = area_width_estimate(trace);
    trace.meta["config"] = config.digest;

    const std::filesystem::path out = prepare_out_dir(options);
    const std::string trace_digest = emit(out / config.output.trace, trace);

    // Per-frequency convergence diagnostics go to their own CSV schema.
    std::string diag_bytes = "# morsekit " + std::string(version) + "\n# config = " +
                             config.digest + "\nfrequency_hz,cycles,last_delta\n";
    for (std::size_t i = 0; i < diagnostics.frequency_hz.size(); ++i) {
        char row[80];
        std::snprintf(row, sizeof row, "%.15g,%d,%.15g\n", diagnostics.frequency_hz[i],
                      diagnostics.cycles[i], diagnostics.last_delta[i]);
        diag_bytes += row;
    }
    const std::string diag_digest = emit(out / config.output.diagnostics, diag_bytes);

    int max_cycles = 0;
    double max_last_delta = 0.0;
    for (int c : diagnostics.cycles) max_cycles = std::max(max_cycles, c);
    for (double d : diagnostics.last_delta) max_last_delta = std::max(max_last_delta, d);

    ordered_json report = provenance(config, "pulsed", std::nullopt);
    report["schedule"] = {{"segments", config.schedule.segments.size()},
                          {"period_s", config.schedule.period_s()},
                          {"resonance_hz", config.schedule.resonance_hz}};
    report["summary"] = {{"area", summary.area},
                         {"width_hz", summary.width_hz},
                         {"proxy", summary.proxy},
                         {"peak_hz", summary.peak_hz},
                         {"peak_value", summary.peak_value}};
    report["diagnostics"] = {{"max_cycles", max_cycles},
                             {"max_last_delta", max_last_delta}};
    const std::string report_digest = emit(out / config.output.report, report.dump(2) + "\n");
    write_manifest(config, options, "pulsed", std::nullopt,
                   {{config.output.trace, trace_digest},
                    {config.output.diagnostics, diag_digest},
                    {config.output.report, report_digest}});

    std::cout << "pulsed: " << trace.size() << " points, peak " << summary.peak_value
              << " at " << summary.peak_hz << " Hz, width " << summary.width_hz
              << " Hz\n";
    return 0;
}

int cmd_estimate(const RunConfig& config, const CommandOptions& options) {
    const EstimateSpec& est = config.estimate;
    const AtomSpecies& species = config.species;
    auto require = [&](double v, const char* key) {
        if (!(v > 0.0))
            throw ConfigError(config.origin + ": missing or non-positive " +
                              std::string(key));
    };
    require(est.beam.wavelength_m, "beam.wavelength_m");
    require(est.beam.natural_linewidth_hz, "beam.natural_linewidth_hz");
    require(est.cell.length_m, "cell.length_m");
    require(est.cell.temperature_k, "cell.temperature_k");
    require(est.cell.atomic_mass_kg, "cell.atomic_mass_kg");
    require(est.cell.bias_gauss, "cell.bias_gauss");
    require(est.pump_wavelength_m, "estimate.pump_wavelength_m");
    require(est.pump_linewidth_hz, "estimate.pump_linewidth_hz");
    require(est.doppler_width_hz, "estimate.doppler_width_hz");
    require(est.trap_extent_m, "estimate.trap_extent_m");

    const ScatteringRate scattering = photon_scattering_rate(est.beam);
    const double g_upper = g_factor(species, species.f_upper());
    const double g_lower = g_factor(species, species.f_lower());
    const GradientBroadening broadening = gradient_broadening(est.cell, g_upper);
    const ResolutionCheck resolution =
        resolution_criterion(est.cell, g_upper, species.hyperfine_splitting_hz,
                             est.measured_gradient_coefficient);
    const double rho_c =
        critical_density_cm3(est.pump_wavelength_m, est.pump_linewidth_hz,
                             est.doppler_width_hz, est.trap_extent_m);

    ordered_json report = provenance(config, "estimate", std::nullopt);
    report["photon_scattering"] = {
        {"exact_hz", scattering.exact_hz},
        {"far_detuned_hz", scattering.far_detuned_hz},
        {"saturation", scattering.saturation},
        {"saturation_intensity_w_m2", scattering.saturation_intensity_w_m2},
        {"far_detuned_valid", scattering.far_detuned_valid},
        {"order_of_magnitude", scattering.order_of_magnitude}};
    report["gradient_broadening"] = {
        {"rate_hz", broadening.rate_hz},
        {"coefficient_hz_m2_per_mg2", broadening.coefficient_hz_m2_per_mg2},
        {"thermal_velocity_m_s", broadening.thermal_velocity_m_s},
        {"order_of_magnitude", broadening.order_of_magnitude}};
    report["resolution"] = {
        {"relative_inhomogeneity", resolution.relative_inhomogeneity},
        {"threshold", resolution.threshold},
        {"qz_splitting_hz", resolution.qz_splitting_hz},
        {"larmor_hz", resolution.larmor_hz},
        {"critical_gradient_mg_per_m", resolution.critical_gradient_mg_per_m},
        {"coefficient_hz_m2_per_mg2", resolution.coefficient_hz_m2_per_mg2},
        {"resolved", resolution.resolved},
        {"order_of_magnitude", resolution.order_of_magnitude}};
    report["critical_density_cm3"] = rho_c;
    ordered_json manifolds = ordered_json::array();
    for (double f : {species.f_upper(), species.f_lower()}) {
        const double larmor = larmor_frequency_hz(species, f, est.cell.bias_gauss);
        manifolds.push_back(
            {{"f", f},
             {"g_factor", g_factor(species, f)},
             {"larmor_hz", larmor},
             {"qz_splitting_hz",
              qz_splitting_hz(larmor, species.hyperfine_splitting_hz)}});
    }
    report["manifolds"] = manifolds;

    const std::filesystem::path out = prepare_out_dir(options);
    const std::string report_digest =
        emit(out / config.output.report, report.dump(2) + "\n");
    write_manifest(config, options, "estimate", std::nullopt,
                   {{config.output.report, report_digest}});

    // Human summary; '~' marks order-of-magnitude contracts.
    std::printf("photon scattering   Gamma_ph ~ %.4g Hz far-detuned (exact %.4g Hz, s = %.3g)\n",
                scattering.far_detuned_hz, scattering.exact_hz, scattering.saturation);
    std::printf("gradient broadening coefficient ~ %.4g Hz m^2/mG^2, rate ~ %.4g Hz at %.4g mG/m (v = %.4g m/s)\n",
                broadening.coefficient_hz_m2_per_mg2, broadening.rate_hz,
                est.cell.gradient_mg_per_m, broadening.thermal_velocity_m_s);
    std::printf("resolution          rel. inhomogeneity %.4g vs threshold ~ %.4g -> %s\n",
                resolution.relative_inhomogeneity, resolution.threshold,
                resolution.resolved ? "resolved" : "unresolved");
    std::printf("critical density    rho_C ~ %.4g cm^-3\n", rho_c);
    for (double f : {species.f_upper(), species.f_lower()}) {
        const double larmor = larmor_frequency_hz(species, f, est.cell.bias_gauss);
        std::printf("manifold F=%g        g_F = %+.6f, nu_L = %.6g Hz, nu_QZ = %.4g Hz at %.4g G\n",
                    f, g_factor(species, f), larmor,
                    qz_splitting_hz(larmor, species.hyperfine_splitting_hz),
                    est.cell.bias_gauss);
    }
    (void)g_lower;
    return 0;
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"morsekit: magneto-optical resonance spectra of an alkali "
                 "spin ensemble - simulation, fitting, and estimators"};
    app.set_version_flag("--version", std::string(version));
    app.require_subcommand(1);

    struct SubOptions {
        std::string config;
        std::string out = ".";
        std::optional<std::uint64_t> seed;
        std::string trace;
    };
    SubOptions opts;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config, "key=value run configuration")
            ->required();
        sub->add_option("--out", opts.out, "output directory (created if missing)");
        sub->add_option("--seed", opts.seed, "override noise.seed");
    };
    CLI::App* simulate = app.add_subcommand("simulate", "synthesize a cw spectrum");
    add_common(simulate);
    CLI::App* fit_cmd = app.add_subcommand("fit", "fit the spin model to a trace");
    add_common(fit_cmd);
    fit_cmd->add_option("--trace", opts.trace, "input trace CSV")->required();
    CLI::App* pulsed = app.add_subcommand("pulsed", "simulate a pulsed-probe spectrum");
    add_common(pulsed);
    CLI::App* estimate =
        app.add_subcommand("estimate", "systematics and feasibility estimators");
    add_common(estimate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        // Help/version exit cleanly; anything else is a usage(config) error.
        return code == 0 ? 0 : 2;
    }

    try {
        const RunConfig config = load_config(opts.config);
        CommandOptions options;
        options.out_dir = opts.out;
        options.seed_override = opts.seed;
        if (!opts.trace.empty()) options.trace_path = opts.trace;
        if (simulate->parsed()) return cmd_simulate(config, options);
        if (fit_cmd->parsed()) return cmd_fit(config, options);
        if (pulsed->parsed()) return cmd_pulsed(config, options);
        return cmd_estimate(config, options);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 3;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return 4;
    } catch (const SingularError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 5;
    } catch (const EstimationError& e) {
        std::cerr << "estimation error: " << e.what() << "\n";
        return 5;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace morsekit
