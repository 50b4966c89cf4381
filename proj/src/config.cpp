#include "morsekit/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "morsekit/errors.hpp"
#include "morsekit/spectrum.hpp"
#include "morsekit/trace_io.hpp"
#include "morsekit/units.hpp"
#include "morsekit/version.hpp"

namespace morsekit {
namespace {

struct Entry {
    std::string key;
    std::string value;
    int line = 0;
};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void fail_semantic(const std::string& origin, int line,
                                const std::string& message) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + message);
}

double parse_double(const Entry& e) {
    double value = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("value of '" + e.key + "' is not a number: '" + e.value + "'",
                         e.line);
    return value;
}

template <typename Int>
Int parse_integer(const Entry& e) {
    Int value = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("value of '" + e.key + "' is not an integer: '" + e.value + "'",
                         e.line);
    return value;
}

bool parse_bool(const Entry& e) {
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    throw ParseError("value of '" + e.key + "' must be true or false, got '" + e.value +
                         "'",
                     e.line);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t next = text.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(trim(std::string_view(text).substr(pos)));
            break;
        }
        out.push_back(trim(std::string_view(text).substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

PulseSegment parse_segment(const Entry& e, const std::string& origin) {
    // duration_s gamma_hz on|off [probe]
    std::istringstream stream(e.value);
    std::vector<std::string> tokens;
    std::string token;
    while (stream >> token) tokens.push_back(token);
    if (tokens.size() < 3 || tokens.size() > 4)
        throw ParseError("pulse.segment needs 'duration_s gamma_hz on|off [probe]', got '" +
                             e.value + "'",
                         e.line);
    PulseSegment segment;
    Entry duration{e.key + " duration", tokens[0], e.line};
    Entry gamma{e.key + " gamma", tokens[1], e.line};
    segment.duration_s = parse_double(duration);
    segment.gamma_total_hz = parse_double(gamma);
    if (tokens[2] == "on")
        segment.drive_on = true;
    else if (tokens[2] == "off")
        segment.drive_on = false;
    else
        throw ParseError("pulse.segment drive flag must be on or off, got '" + tokens[2] +
                             "'",
                         e.line);
    if (tokens.size() == 4) {
        if (tokens[3] != "probe")
            throw ParseError("pulse.segment trailing token must be 'probe', got '" +
                                 tokens[3] + "'",
                             e.line);
        segment.probe_window = true;
    }
    (void)origin;
    return segment;
}

/// Suffix of a parameter-scoped fit key ("fit.start.epsilon" -> epsilon).
std::optional<FitParam> param_suffix(const std::string& key, const std::string& prefix) {
    if (key.rfind(prefix, 0) != 0) return std::nullopt;
    const std::string name = key.substr(prefix.size());
    for (std::size_t i = 0; i < fit_param_count; ++i)
        if (name == to_string(static_cast<FitParam>(i))) return static_cast<FitParam>(i);
    return std::nullopt;
}

} // namespace

std::vector<double> GridSpec::build(const SpinModel& model) const {
    if (points < 2) throw ConfigError("grid.points must be at least 2");
    if (automatic) {
        if (!(span_factor > 0.0)) throw ConfigError("grid.span_factor must be > 0");
        return default_grid(model, points, span_factor);
    }
    if (!(stop_hz > start_hz))
        throw ConfigError("grid.stop_hz must exceed grid.start_hz");
    std::vector<double> grid(points);
    const double step = (stop_hz - start_hz) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = start_hz + step * static_cast<double>(i);
    grid.back() = stop_hz;
    return grid;
}

FitProblem FitSpec::apply(FitProblem problem) const {
    if (free) problem.free = *free;
    for (std::size_t i = 0; i < fit_param_count; ++i) {
        if (start[i]) problem.start[i] = *start[i];
        if (lower[i]) problem.bounds[i].first = *lower[i];
        if (upper[i]) problem.bounds[i].second = *upper[i];
        if (problem.bounds[i].first >= problem.bounds[i].second)
            throw ConfigError("fit bounds for " + to_string(static_cast<FitParam>(i)) +
                              " are empty");
    }
    problem.poisson_weights = poisson_weights;
    problem.weight_floor = weight_floor;
    problem.parametrize_orientation = parametrize_orientation;
    problem.restarts = restarts;
    problem.restart_threshold = restart_threshold;
    problem.restart_seed = restart_seed;
    problem.max_iterations = max_iterations;
    problem.tol_residual_rel = tol_residual_rel;
    problem.tol_step = tol_step;
    return problem;
}

namespace {
RunConfig parse_config_impl(const std::string& text, const std::string& origin);
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    try {
        return parse_config_impl(text, origin);
    } catch (const ParseError& e) {
        // Config problems, including token-level ones, are config errors
        // (exit 2); ParseError is reserved for trace files.
        throw ConfigError(origin + ": " + e.what());
    }
}

namespace {

RunConfig parse_config_impl(const std::string& text, const std::string& origin) {
    RunConfig config;
    config.origin = origin;
    config.digest = fnv1a_hex(text);
    config.species = cesium();

    // Tokenize into key/value entries.
    std::vector<Entry> entries;
    {
        std::istringstream stream(text);
        std::string line;
        int line_no = 0;
        while (std::getline(stream, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string stripped = trim(line);
            if (stripped.empty()) continue;
            const std::size_t eq = stripped.find('=');
            if (eq == std::string::npos)
                throw ParseError("expected 'key = value', got '" + stripped + "'", line_no);
            Entry entry;
            entry.key = trim(std::string_view(stripped).substr(0, eq));
            entry.value = trim(std::string_view(stripped).substr(eq + 1));
            entry.line = line_no;
            if (entry.key.empty()) throw ParseError("empty key", line_no);
            if (entry.value.empty())
                throw ParseError("empty value for '" + entry.key + "'", line_no);
            entries.push_back(std::move(entry));
        }
    }

    std::set<std::string> seen;
    for (const Entry& e : entries) {
        if (e.key != "pulse.segment" && !seen.insert(e.key).second)
            fail_semantic(origin, e.line, "duplicate key '" + e.key + "'");
    }

    bool schema_seen = false;
    std::optional<double> model_epsilon, model_orientation;
    std::optional<double> model_f, model_n4;
    std::optional<double> beam_w_m2, beam_mw_cm2;
    std::optional<double> gradient_mg, gradient_t;
    std::optional<double> grid_start, grid_stop;

    for (const Entry& e : entries) {
        const std::string& k = e.key;
        if (k == "schema_version") {
            const int version = parse_integer<int>(e);
            if (version != schema_version)
                fail_semantic(origin, e.line,
                              "unsupported schema_version " + std::to_string(version) +
                                  " (this build reads version " +
                                  std::to_string(schema_version) + ")");
            config.schema_version = version;
            schema_seen = true;
        } else if (k == "species.preset") {
            if (e.value != "cesium")
                fail_semantic(origin, e.line, "unknown species preset '" + e.value + "'");
            config.species = cesium();
        } else if (k == "species.name") {
            config.species.name = e.value;
        } else if (k == "species.nuclear_spin") {
            config.species.nuclear_spin = parse_double(e);
        } else if (k == "species.hyperfine_splitting_hz") {
            config.species.hyperfine_splitting_hz = parse_double(e);
        } else if (k == "species.electron_moment_bohr") {
            config.species.electron_moment_bohr = parse_double(e);
        } else if (k == "species.nuclear_moment_nuclear") {
            config.species.nuclear_moment_nuclear = parse_double(e);
        } else if (k == "model.f") {
            model_f = parse_double(e);
        } else if (k == "model.epsilon") {
            model_epsilon = parse_double(e);
        } else if (k == "model.orientation") {
            model_orientation = parse_double(e);
        } else if (k == "model.n4") {
            model_n4 = parse_double(e);
        } else if (k == "model.atoms") {
            config.total_atoms = parse_double(e);
        } else if (k == "model.gamma_com_hz") {
            config.model.gamma_com_hz = parse_double(e);
        } else if (k == "model.gamma_pump_hz") {
            config.model.gamma_pump_hz = parse_double(e);
        } else if (k == "model.center_hz") {
            config.model.omega_center_hz = parse_double(e);
        } else if (k == "model.split_hz") {
            config.model.omega_split_hz = parse_double(e);
        } else if (k == "model.amplitude") {
            config.model.amplitude = parse_double(e);
        } else if (k == "grid.start_hz") {
            grid_start = parse_double(e);
        } else if (k == "grid.stop_hz") {
            grid_stop = parse_double(e);
        } else if (k == "grid.points") {
            config.grid.points = parse_integer<std::size_t>(e);
        } else if (k == "grid.span_factor") {
            config.grid.span_factor = parse_double(e);
        } else if (k == "noise.kind") {
            if (e.value == "none")
                config.noise.kind = NoiseSpec::Kind::none;
            else if (e.value == "gaussian")
                config.noise.kind = NoiseSpec::Kind::gaussian;
            else
                fail_semantic(origin, e.line, "noise.kind must be none or gaussian");
        } else if (k == "noise.level") {
            config.noise.level = parse_double(e);
        } else if (k == "noise.seed") {
            config.noise.seed = parse_integer<std::uint64_t>(e);
        } else if (k == "pulse.segment") {
            config.schedule.segments.push_back(parse_segment(e, origin));
            config.schedule_given = true;
        } else if (k == "pulse.chi_rad_s") {
            config.schedule.chi_rad_s = parse_double(e);
            config.schedule_given = true;
        } else if (k == "pulse.delta_rho") {
            config.schedule.delta_rho = parse_double(e);
            config.schedule_given = true;
        } else if (k == "pulse.resonance_hz") {
            config.schedule.resonance_hz = parse_double(e);
            config.schedule_given = true;
        } else if (k == "pulse.cycles_per_point") {
            config.schedule.cycles_per_point = parse_integer<int>(e);
            config.schedule_given = true;
        } else if (k == "pulse.max_cycles") {
            config.schedule.max_cycles = parse_integer<int>(e);
            config.schedule_given = true;
        } else if (k == "fit.auto_init") {
            config.fit.auto_init = parse_bool(e);
        } else if (k == "fit.free") {
            std::array<bool, fit_param_count> free{};
            for (const std::string& name : split(e.value, ',')) {
                if (name.empty())
                    fail_semantic(origin, e.line, "empty entry in fit.free list");
                bool known = false;
                for (std::size_t i = 0; i < fit_param_count; ++i) {
                    if (name == to_string(static_cast<FitParam>(i))) {
                        free[i] = true;
                        known = true;
                        break;
                    }
                }
                if (!known)
                    fail_semantic(origin, e.line, "unknown fit parameter '" + name + "'");
            }
            config.fit.free = free;
        } else if (auto p = param_suffix(k, "fit.start.")) {
            config.fit.start[static_cast<std::size_t>(*p)] = parse_double(e);
        } else if (auto lo = param_suffix(k, "fit.lower.")) {
            config.fit.lower[static_cast<std::size_t>(*lo)] = parse_double(e);
        } else if (auto hi = param_suffix(k, "fit.upper.")) {
            config.fit.upper[static_cast<std::size_t>(*hi)] = parse_double(e);
        } else if (k == "fit.poisson_weights") {
            config.fit.poisson_weights = parse_bool(e);
        } else if (k == "fit.weight_floor") {
            config.fit.weight_floor = parse_double(e);
        } else if (k == "fit.parametrize_orientation") {
            config.fit.parametrize_orientation = parse_bool(e);
        } else if (k == "fit.restarts") {
            config.fit.restarts = parse_integer<int>(e);
        } else if (k == "fit.restart_threshold") {
            config.fit.restart_threshold = parse_double(e);
        } else if (k == "fit.restart_seed") {
            config.fit.restart_seed = parse_integer<std::uint64_t>(e);
        } else if (k == "fit.max_iterations") {
            config.fit.max_iterations = parse_integer<int>(e);
        } else if (k == "fit.tol_residual_rel") {
            config.fit.tol_residual_rel = parse_double(e);
        } else if (k == "fit.tol_step") {
            config.fit.tol_step = parse_double(e);
        } else if (k == "beam.intensity_w_m2") {
            beam_w_m2 = parse_double(e);
        } else if (k == "beam.intensity_mw_cm2") {
            beam_mw_cm2 = parse_double(e);
        } else if (k == "beam.wavelength_m") {
            config.estimate.beam.wavelength_m = parse_double(e);
        } else if (k == "beam.natural_linewidth_hz") {
            config.estimate.beam.natural_linewidth_hz = parse_double(e);
        } else if (k == "beam.detuning_hz") {
            config.estimate.beam.detuning_hz = parse_double(e);
        } else if (k == "cell.length_m") {
            config.estimate.cell.length_m = parse_double(e);
        } else if (k == "cell.temperature_k") {
            config.estimate.cell.temperature_k = parse_double(e);
        } else if (k == "cell.atomic_mass_kg") {
            config.estimate.cell.atomic_mass_kg = parse_double(e);
        } else if (k == "cell.bias_gauss") {
            config.estimate.cell.bias_gauss = parse_double(e);
        } else if (k == "cell.gradient_mg_per_m") {
            gradient_mg = parse_double(e);
        } else if (k == "cell.gradient_t_per_m") {
            gradient_t = parse_double(e);
        } else if (k == "estimate.measured_gradient_coefficient") {
            config.estimate.measured_gradient_coefficient = parse_double(e);
        } else if (k == "estimate.pump_wavelength_m") {
            config.estimate.pump_wavelength_m = parse_double(e);
        } else if (k == "estimate.pump_linewidth_hz") {
            config.estimate.pump_linewidth_hz = parse_double(e);
        } else if (k == "estimate.doppler_width_hz") {
            config.estimate.doppler_width_hz = parse_double(e);
        } else if (k == "estimate.trap_extent_m") {
            config.estimate.trap_extent_m = parse_double(e);
        } else if (k == "output.trace") {
            config.output.trace = e.value;
        } else if (k == "output.report") {
            config.output.report = e.value;
        } else if (k == "output.model") {
            config.output.model_curve = e.value;
        } else if (k == "output.residual") {
            config.output.residual = e.value;
        } else if (k == "output.manifest") {
            config.output.manifest = e.value;
        } else if (k == "output.diagnostics") {
            config.output.diagnostics = e.value;
        } else {
            fail_semantic(origin, e.line, "unknown key '" + k + "'");
        }
    }

    if (!schema_seen)
        throw ConfigError(origin + ": missing required key 'schema_version'");

    // Model assembly. Orientation is translated through the geometric
    // population family once f is final.
    if (model_f) config.model.f = *model_f;
    if (model_epsilon && model_orientation)
        throw ConfigError(origin +
                          ": model.epsilon and model.orientation are mutually exclusive");
    if (model_epsilon) config.model.epsilon = *model_epsilon;
    if (model_orientation)
        config.model.epsilon = epsilon_from_orientation(config.model.f, *model_orientation);
    if (model_n4 && config.total_atoms > 0.0)
        throw ConfigError(origin + ": model.n4 and model.atoms are mutually exclusive");
    if (model_n4) config.model.n4 = *model_n4;
    if (config.total_atoms > 0.0)
        config.model.n4 = config.total_atoms /
                          populations_from_epsilon(config.model.f, 1.0, config.model.epsilon)
                              .sum();

    if (grid_start || grid_stop) {
        if (!grid_start || !grid_stop)
            throw ConfigError(origin +
                              ": grid.start_hz and grid.stop_hz must be given together");
        config.grid.automatic = false;
        config.grid.start_hz = *grid_start;
        config.grid.stop_hz = *grid_stop;
    }

    if (config.noise.level < 0.0)
        throw ConfigError(origin + ": noise.level must be >= 0");
    if (config.noise.kind == NoiseSpec::Kind::none && config.noise.level > 0.0)
        throw ConfigError(origin + ": noise.level set but noise.kind is none");

    if (beam_w_m2 && beam_mw_cm2)
        throw ConfigError(origin +
                          ": beam.intensity_w_m2 and beam.intensity_mw_cm2 are mutually "
                          "exclusive");
    if (beam_w_m2) config.estimate.beam.intensity_w_m2 = *beam_w_m2;
    if (beam_mw_cm2)
        config.estimate.beam.intensity_w_m2 = units::w_m2_from_mw_cm2(*beam_mw_cm2);

    if (gradient_mg && gradient_t)
        throw ConfigError(origin +
                          ": cell.gradient_mg_per_m and cell.gradient_t_per_m are "
                          "mutually exclusive");
    if (gradient_mg) config.estimate.cell.gradient_mg_per_m = *gradient_mg;
    if (gradient_t)
        config.estimate.cell.gradient_mg_per_m = units::mg_per_m_from_t_per_m(*gradient_t);

    return config;
}

} // namespace

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.string());
}

} // namespace morsekit
