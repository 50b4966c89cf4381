#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "morsekit/spectrum.hpp"

namespace morsekit {

/// The six cw model parameters, in canonical order. `scale` is the single
/// identifiable amplitude*N^2 product of a power trace; sqrt(scale) acts as
/// the relative atom number.
enum class FitParam : int {
    scale = 0,
    epsilon = 1,
    gamma_com = 2,
    gamma_pump = 3,
    omega_center = 4,
    omega_split = 5,
};

inline constexpr std::size_t fit_param_count = 6;

std::string to_string(FitParam p);
FitParam fit_param_from_string(const std::string& name);

/// Weighted nonlinear least-squares problem for a mors_power trace.
/// Positive parameters are optimized in log coordinates, frequencies
/// linearly; with parametrize_orientation the population coordinate becomes
/// the orientation p itself (linear, through the epsilon bijection).
struct FitProblem {
    double f = 4.0;

    /// Which parameter is free; fixed ones keep their `start` value. The
    /// default is the five-parameter fit with gamma_pump pinned.
    std::array<bool, fit_param_count> free{true, true, true, false, true, true};
    /// Start values for free parameters, fixed values for the rest
    /// (physical units; free positive parameters must start > 0).
    std::array<double, fit_param_count> start{1.0, 0.5, 10.0, 0.0, 0.0, 0.0};
    /// Per-parameter (lower, upper) bounds, applied to free parameters.
    std::array<std::pair<double, double>, fit_param_count> bounds{{
        {1e-30, 1e30},   // scale
        {1e-6, 1e6},     // epsilon
        {1e-9, 1e9},     // gamma_com
        {1e-9, 1e9},     // gamma_pump
        {-1e12, 1e12},   // omega_center
        {-1e12, 1e12},   // omega_split
    }};

    /// Per-point weights; empty means uniform (or Poisson-like if enabled).
    std::vector<double> weights;
    /// Poisson-like weighting w = 1/max(y, floor); floor defaults to
    /// 1e-3 * max(y) when weight_floor <= 0.
    bool poisson_weights = false;
    double weight_floor = 0.0;

    bool parametrize_orientation = false;

    double tol_residual_rel = 1e-10; ///< relative objective-decrease threshold
    double tol_step = 1e-12;         ///< step-norm threshold (transformed coords)
    int max_iterations = 200;

    /// Latin-hypercube multi-start: tried when the first descent fails to
    /// converge or stalls above restart_threshold (relative residual).
    int restarts = 8;
    double restart_threshold = 0.02;
    std::uint64_t restart_seed = 1;
};

struct FitResult {
    std::array<double, fit_param_count> parameters{};  ///< physical values
    std::array<double, fit_param_count> uncertainty{}; ///< local 1-sigma; 0 if fixed
    bool converged = false;
    int iterations = 0;
    int restarts_used = 0;
    double residual_norm = 0.0;     ///< sqrt(sum w (model - y)^2)
    double relative_residual = 0.0; ///< residual_norm / sqrt(sum w y^2)
    double orientation = 0.0;       ///< p of the fitted population family
    double j_z = 0.0;               ///< sqrt(scale) * F * p, relative units
    double n_rel = 0.0;             ///< sqrt(scale)
    std::vector<double> line_centers_hz; ///< fitted (m+1, m) line positions
    std::vector<double> line_widths_hz;  ///< fitted per-line FWHM
    std::vector<double> objective_history; ///< weighted SSR after each accepted step
    double sensitivity_condition = 0.0; ///< max/min eigenvalue ratio of J^T J
    bool degenerate = false;            ///< near-singular sensitivity at the optimum
    std::string message;

    /// Fitted parameters as a synthesizable model (n4 chosen so the
    /// normalized populations carry the fitted epsilon, amplitude = scale).
    SpinModel model(double f) const;
};

/// Minimize sum_i w_i (MORS(omega_i; theta) - y_i)^2 by damped Gauss-Newton
/// steps with central-difference sensitivities (relative step 1e-6).
/// Accepted steps never increase the objective. Non-convergence returns
/// converged = false with best-so-far diagnostics (no throw).
///
/// At gamma_pump = 0 the power spectrum is exactly invariant under
/// (epsilon, omega_split) -> (1/epsilon, -omega_split), so the sign of the
/// orientation is not identifiable; the fit reports the orientation >= 0
/// representative of that mirror pair whenever both parameters are free (or
/// omega_split is pinned at zero).
FitResult fit(const SpectrumTrace& trace, const FitProblem& problem);

/// Model trace for explicit parameter values (unit weights, no noise):
/// the forward map the fitter inverts.
std::vector<double> evaluate_model(double f,
                                   const std::array<double, fit_param_count>& params,
                                   const std::vector<double>& omega_grid_hz);

/// Heuristic seed from the trace alone: center from the global maximum,
/// common width from the tallest peak's FWHM, splitting from the median
/// spacing of detected maxima (quadratic-Zeeman fallback when unresolved),
/// epsilon from the height ratio of the two tallest adjacent maxima
/// (fallback 0.5), scale from the peak height. Throws EstimationError on
/// flat traces.
FitProblem initialize(const SpectrumTrace& trace, double f = 4.0,
                      double nu_hfs_hz = 9.1926e9);

/// Eigenvalues (ascending) of the weighted J^T J at problem.start in the
/// transformed coordinates: near-zero directions expose parameter
/// degeneracies before running a fit.
std::vector<double> sensitivity_spectrum(const SpectrumTrace& trace,
                                         const FitProblem& problem);

/// Least-squares line of fitted collective spins against DC rotation
/// angles: the proportionality cross-check between the two observables.
struct ConsistencyReport {
    double slope = 0.0;
    double intercept = 0.0;
    double relative_intercept = 0.0; ///< intercept / rms(j_z)
    double correlation = 0.0;
    std::size_t points = 0;
};

ConsistencyReport consistency_check(const std::vector<double>& j_z,
                                    const std::vector<double>& theta_dc);
ConsistencyReport consistency_check(const std::vector<FitResult>& fits,
                                    const std::vector<double>& theta_dc);

/// One constrained fit of the unresolved-regime family: orientation pinned,
/// gamma_com = omega_split = 0, center pinned at the trace maximum, scale
/// and gamma_pump free.
struct DegeneracyScanPoint {
    double p = 0.0;
    double epsilon = 0.0;
    double scale = 0.0;
    double gamma_pump_hz = 0.0;
    double j_z = 0.0;
    double relative_residual = 0.0;
    bool converged = false;
};

struct DegeneracyScan {
    std::vector<DegeneracyScanPoint> points; ///< ascending in p

    /// Width of the orientation interval compatible with an external
    /// collective-spin measurement of the given relative accuracy, read off
    /// the scanned j_z(p) curve. The reference defaults to the largest
    /// scanned orientation.
    double inversion_interval_width(double jz_relative_accuracy,
                                    std::optional<double> reference_p =
                                        std::nullopt) const;
};

/// Fit the single-feature trace at each pinned orientation of p_grid,
/// quantifying the (p, J_z, gamma_pump) degeneracy of the unresolved limit.
DegeneracyScan degeneracy_scan(const SpectrumTrace& trace,
                               const std::vector<double>& p_grid, double f = 4.0);

} // namespace morsekit
