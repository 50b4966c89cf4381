#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "morsekit/atomic.hpp"
#include "morsekit/estimators.hpp"
#include "morsekit/fit.hpp"
#include "morsekit/pulsed.hpp"
#include "morsekit/spin_model.hpp"

namespace morsekit {

/// How the frequency axis is produced. Explicit start/stop wins; otherwise
/// the grid auto-centers on the model's line ladder.
struct GridSpec {
    bool automatic = true;
    double start_hz = 0.0;
    double stop_hz = 0.0;
    std::size_t points = 2001;
    double span_factor = 10.0;

    std::vector<double> build(const SpinModel& model) const;
};

struct NoiseSpec {
    enum class Kind { none, gaussian };
    Kind kind = Kind::none;
    double level = 0.0; ///< sigma as a fraction of the peak value
    std::optional<std::uint64_t> seed;
};

/// Output file names, resolved against the --out directory at run time.
struct OutputSpec {
    std::string trace = "trace.csv";
    std::string report = "report.json";
    std::string model_curve = "model.csv";
    std::string residual = "residual.csv";
    std::string manifest = "manifest.json";
    std::string diagnostics = "diagnostics.csv";
};

/// Fit options layered on top of the automatic initialization: any start
/// value or bound given in the config overrides the heuristic seed.
struct FitSpec {
    bool auto_init = true;
    std::optional<std::array<bool, fit_param_count>> free;
    std::array<std::optional<double>, fit_param_count> start;
    std::array<std::optional<double>, fit_param_count> lower;
    std::array<std::optional<double>, fit_param_count> upper;
    bool poisson_weights = false;
    double weight_floor = 0.0;
    bool parametrize_orientation = false;
    int restarts = 8;
    double restart_threshold = 0.02;
    std::uint64_t restart_seed = 1;
    int max_iterations = 200;
    double tol_residual_rel = 1e-10;
    double tol_step = 1e-12;

    /// Merge onto an initialized problem.
    FitProblem apply(FitProblem problem) const;
};

/// Inputs of the order-of-magnitude estimators.
struct EstimateSpec {
    ProbeBeam beam;
    CellGeometry cell;
    std::optional<double> measured_gradient_coefficient; ///< Hz m^2 / mG^2
    double pump_wavelength_m = 0.0;
    double pump_linewidth_hz = 0.0;
    double doppler_width_hz = 0.0;
    double trap_extent_m = 0.0;
};

/// Fully parsed and validated run configuration. See the README for the
/// complete key reference.
struct RunConfig {
    int schema_version = 0;
    AtomSpecies species;     ///< cesium preset unless overridden
    SpinModel model;
    double total_atoms = 0.0; ///< model.atoms; 0 = keep model.n4 = 1
    GridSpec grid;
    NoiseSpec noise;
    PulseSchedule schedule;
    bool schedule_given = false;
    FitSpec fit;
    EstimateSpec estimate;
    OutputSpec output;
    std::string digest;      ///< FNV-1a of the raw config bytes
    std::string origin;      ///< path or label, for messages
};

/// Parse `key = value` text (one pair per line, `#` comments). Unknown or
/// duplicated keys are rejected with the offending line number; only
/// `pulse.segment` may repeat. `schema_version` is mandatory.
RunConfig parse_config(const std::string& text, const std::string& origin);

RunConfig load_config(const std::filesystem::path& path);

} // namespace morsekit
