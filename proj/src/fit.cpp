#include "morsekit/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "morsekit/atomic.hpp"
#include "morsekit/errors.hpp"

namespace morsekit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t index_of(FitParam p) { return static_cast<std::size_t>(p); }

// ---------------------------------------------------------------------------
// Small dense linear algebra (systems are at most 6x6).

/// Solve a x = b by Gaussian elimination with partial pivoting.
bool solve_linear(std::vector<double> a, std::vector<double> b, std::size_t k,
                  std::vector<double>& x) {
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < k; ++row)
            if (std::abs(a[row * k + col]) > std::abs(a[pivot * k + col])) pivot = row;
        if (!(std::abs(a[pivot * k + col]) > 0.0)) return false;
        if (pivot != col) {
            for (std::size_t j = 0; j < k; ++j) std::swap(a[col * k + j], a[pivot * k + j]);
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t row = col + 1; row < k; ++row) {
            const double factor = a[row * k + col] / a[col * k + col];
            for (std::size_t j = col; j < k; ++j) a[row * k + j] -= factor * a[col * k + j];
            b[row] -= factor * b[col];
        }
    }
    x.assign(k, 0.0);
    for (std::size_t row = k; row-- > 0;) {
        double acc = b[row];
        for (std::size_t j = row + 1; j < k; ++j) acc -= a[row * k + j] * x[j];
        x[row] = acc / a[row * k + row];
        if (!std::isfinite(x[row])) return false;
    }
    return true;
}

void mat_mul(const std::vector<double>& a, const std::vector<double>& b,
             std::vector<double>& out, std::size_t n) {
    out.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < n; ++l) {
            const double ail = a[i * n + l];
            if (ail == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] += ail * b[l * n + j];
        }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> sym_eigenvalues(std::vector<double> a, std::size_t n) {
    std::vector<double> rot(n * n), tmp(n * n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0, diag = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            diag += a[p * n + p] * a[p * n + p];
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        }
        if (off <= 1e-28 * (diag + 1e-300)) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t =
                    (theta >= 0.0 ? 1.0 : -1.0) /
                    (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // Explicit similarity transform R^T A R; n <= 6 keeps the
                // dense product trivial and obviously correct.
                rot.assign(n * n, 0.0);
                for (std::size_t i = 0; i < n; ++i) rot[i * n + i] = 1.0;
                rot[p * n + p] = c;
                rot[q * n + q] = c;
                rot[p * n + q] = s;
                rot[q * n + p] = -s;
                std::vector<double> rt(n * n);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) rt[i * n + j] = rot[j * n + i];
                mat_mul(rt, a, tmp, n);
                mat_mul(tmp, rot, a, n);
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a[i * n + i];
    std::sort(eig.begin(), eig.end());
    return eig;
}

// ---------------------------------------------------------------------------
// Parameter transforms: log coordinates for positive parameters, linear for
// frequencies; optional linear-orientation coordinate for the population
// parameter.

double orientation_of_epsilon(double f, double eps) {
    return orientation(normalized(populations_from_epsilon(f, 1.0, eps)));
}

struct Transform {
    double f = 4.0;
    bool orientation_coordinate = false;

    bool is_log(std::size_t i) const {
        if (i == index_of(FitParam::epsilon)) return !orientation_coordinate;
        return i <= index_of(FitParam::gamma_pump);
    }

    double to_internal(std::size_t i, double physical) const {
        if (i == index_of(FitParam::epsilon) && orientation_coordinate)
            return orientation_of_epsilon(f, physical);
        if (is_log(i)) {
            if (!(physical > 0.0))
                throw DomainError("free parameter '" +
                                  to_string(static_cast<FitParam>(i)) +
                                  "' requires a positive start value");
            return std::log(physical);
        }
        return physical;
    }

    double to_physical(std::size_t i, double internal) const {
        if (i == index_of(FitParam::epsilon) && orientation_coordinate)
            return epsilon_from_orientation(f, std::clamp(internal, -1.0, 1.0));
        if (is_log(i)) return std::exp(internal);
        return internal;
    }

    std::pair<double, double> internal_bounds(std::size_t i,
                                              std::pair<double, double> physical) const {
        if (i == index_of(FitParam::epsilon) && orientation_coordinate) {
            // epsilon -> p is decreasing; map and reorder the bracket.
            double lo = orientation_of_epsilon(f, physical.second);
            double hi = orientation_of_epsilon(f, physical.first);
            return {std::max(lo, -1.0 + 1e-9), std::min(hi, 1.0 - 1e-9)};
        }
        if (is_log(i)) return {std::log(physical.first), std::log(physical.second)};
        return physical;
    }
};

// ---------------------------------------------------------------------------
// Peak scanning shared by initialize() and degeneracy_scan().

struct PeakScan {
    std::size_t peak_index = 0;
    double peak_hz = 0.0;
    double peak_value = 0.0;
    double fwhm_hz = 0.0;                 ///< 0 when no half crossing found
    std::vector<std::size_t> maxima;      ///< detected local maxima, ascending
    std::vector<double> smoothed;
};

void require_trace(const SpectrumTrace& trace, std::size_t min_points) {
    if (trace.size() < min_points || trace.value.size() != trace.size())
        throw DomainError("trace needs at least " + std::to_string(min_points) +
                          " consistent points");
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (!std::isfinite(trace.frequency_hz[i]) || !std::isfinite(trace.value[i]))
            throw DomainError("trace contains non-finite entries");
        if (i > 0 && !(trace.frequency_hz[i] > trace.frequency_hz[i - 1]))
            throw DomainError("trace frequencies must be strictly increasing");
    }
}

PeakScan scan_peaks(const SpectrumTrace& trace) {
    require_trace(trace, 5);
    const std::size_t n = trace.size();

    PeakScan scan;
    // Light box smoothing for detection only: suppresses single-sample noise
    // maxima without moving genuine peaks on realistic grids.
    const std::size_t half_box = std::max<std::size_t>(1, n / 1000);
    scan.smoothed.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i > half_box ? i - half_box : 0;
        const std::size_t hi = std::min(n - 1, i + half_box);
        double acc = 0.0;
        for (std::size_t j = lo; j <= hi; ++j) acc += trace.value[j];
        scan.smoothed[i] = acc / static_cast<double>(hi - lo + 1);
    }
    const std::vector<double>& v = scan.smoothed;

    scan.peak_index = static_cast<std::size_t>(
        std::max_element(v.begin(), v.end()) - v.begin());
    scan.peak_value = v[scan.peak_index];
    scan.peak_hz = trace.frequency_hz[scan.peak_index];
    if (!(scan.peak_value > 0.0))
        throw EstimationError("no identifiable peak: trace is flat or non-positive");

    // Local maxima: best within +/-window samples and carrying a minimal
    // prominence, to survive additive noise.
    const std::size_t window = std::max<std::size_t>(2, n / 300);
    const double floor_value = 0.02 * scan.peak_value;
    const double min_prominence = 0.02 * scan.peak_value;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (v[i] < floor_value) continue;
        const std::size_t lo = i > window ? i - window : 0;
        const std::size_t hi = std::min(n - 1, i + window);
        bool best = true;
        for (std::size_t j = lo; j <= hi && best; ++j)
            if (v[j] > v[i] || (v[j] == v[i] && j < i)) best = j == i;
        if (!best) continue;
        // Topographic prominence within the trace.
        double left_min = v[i], right_min = v[i];
        for (std::size_t j = i; j-- > 0;) {
            if (v[j] > v[i]) break;
            left_min = std::min(left_min, v[j]);
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            if (v[j] > v[i]) break;
            right_min = std::min(right_min, v[j]);
        }
        if (v[i] - std::max(left_min, right_min) < min_prominence) continue;
        scan.maxima.push_back(i);
    }
    if (scan.maxima.empty()) scan.maxima.push_back(scan.peak_index);

    // FWHM of the tallest feature: nearest half crossings on both sides.
    const double half = 0.5 * scan.peak_value;
    double left = trace.frequency_hz.front(), right = trace.frequency_hz.back();
    bool found = false;
    for (std::size_t i = scan.peak_index; i-- > 0;) {
        if (v[i] < half) {
            left = trace.frequency_hz[i] +
                   (half - v[i]) / (v[i + 1] - v[i]) *
                       (trace.frequency_hz[i + 1] - trace.frequency_hz[i]);
            found = true;
            break;
        }
    }
    for (std::size_t i = scan.peak_index + 1; i < n; ++i) {
        if (v[i] < half) {
            right = trace.frequency_hz[i - 1] +
                    (half - v[i - 1]) / (v[i] - v[i - 1]) *
                        (trace.frequency_hz[i] - trace.frequency_hz[i - 1]);
            found = true;
            break;
        }
    }
    scan.fwhm_hz = found ? right - left
                         : 0.25 * (trace.frequency_hz.back() - trace.frequency_hz.front());
    return scan;
}

// ---------------------------------------------------------------------------
// Objective machinery.

struct Objective {
    double f;
    const std::vector<double>* grid;
    const std::vector<double>* values;
    std::vector<double> sqrt_w;
    std::array<double, fit_param_count> params; ///< physical, fixed entries live here
    std::vector<std::size_t> free_idx;
    Transform transform;

    std::array<double, fit_param_count> physical(const std::vector<double>& t) const {
        std::array<double, fit_param_count> out = params;
        for (std::size_t j = 0; j < free_idx.size(); ++j)
            out[free_idx[j]] = transform.to_physical(free_idx[j], t[j]);
        return out;
    }

    /// Weighted residual vector; infinity-filled on evaluation failure so a
    /// trial step is rejected instead of aborting the fit.
    bool residuals(const std::vector<double>& t, std::vector<double>& r) const {
        std::array<double, fit_param_count> p = physical(t);
        std::vector<double> model;
        try {
            model = evaluate_model(f, p, *grid);
        } catch (const Error&) {
            return false;
        }
        r.resize(model.size());
        for (std::size_t i = 0; i < model.size(); ++i)
            r[i] = sqrt_w[i] * (model[i] - (*values)[i]);
        return true;
    }

    double ssr(const std::vector<double>& t) const {
        std::vector<double> r;
        if (!residuals(t, r)) return kInf;
        double acc = 0.0;
        for (double ri : r) acc += ri * ri;
        return acc;
    }

    /// Central-difference Jacobian in the transformed coordinates,
    /// relative step 1e-6. Column-major: jac[j] is the j-th column.
    bool jacobian(const std::vector<double>& t, std::vector<std::vector<double>>& jac) const {
        const std::size_t k = free_idx.size();
        jac.assign(k, {});
        std::vector<double> plus, minus;
        for (std::size_t j = 0; j < k; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(t[j]));
            std::vector<double> tp = t, tm = t;
            tp[j] += h;
            tm[j] -= h;
            if (!residuals(tp, plus) || !residuals(tm, minus)) return false;
            jac[j].resize(plus.size());
            for (std::size_t i = 0; i < plus.size(); ++i)
                jac[j][i] = (plus[i] - minus[i]) / (2.0 * h);
        }
        return true;
    }
};

struct DescentOutcome {
    std::vector<double> t;
    double ssr = kInf;
    int iterations = 0;
    bool converged = false;
    bool stalled = false;
    std::vector<double> history;
};

/// Damped Gauss-Newton descent from t0. Accepted steps never increase the
/// objective; convergence on relative objective decrease or step norm.
DescentOutcome run_descent(const Objective& obj, std::vector<double> t0,
                           const std::vector<std::pair<double, double>>& bounds,
                           double tol_residual_rel, double tol_step, int max_iterations) {
    const std::size_t k = t0.size();
    DescentOutcome out;
    for (std::size_t j = 0; j < k; ++j)
        t0[j] = std::clamp(t0[j], bounds[j].first, bounds[j].second);
    out.t = t0;
    out.ssr = obj.ssr(t0);
    out.history.push_back(out.ssr);
    if (!std::isfinite(out.ssr)) {
        out.stalled = true;
        return out;
    }

    double lambda = 1e-3;
    std::vector<std::vector<double>> jac;
    std::vector<double> r;
    for (int iter = 1; iter <= max_iterations; ++iter) {
        if (out.ssr == 0.0) {
            out.converged = true;
            break;
        }
        if (!obj.residuals(out.t, r) || !obj.jacobian(out.t, jac)) {
            out.stalled = true;
            break;
        }
        // Normal equations G delta = -g with Marquardt damping.
        std::vector<double> g(k, 0.0), gram(k * k, 0.0);
        for (std::size_t a = 0; a < k; ++a) {
            double acc = 0.0;
            for (std::size_t i = 0; i < r.size(); ++i) acc += jac[a][i] * r[i];
            g[a] = acc;
            for (std::size_t b = a; b < k; ++b) {
                double gab = 0.0;
                for (std::size_t i = 0; i < r.size(); ++i) gab += jac[a][i] * jac[b][i];
                gram[a * k + b] = gab;
                gram[b * k + a] = gab;
            }
        }
        double max_diag = 0.0;
        for (std::size_t a = 0; a < k; ++a) max_diag = std::max(max_diag, gram[a * k + a]);

        bool accepted = false;
        std::vector<double> t_new, delta;
        double ssr_new = kInf;
        for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
            std::vector<double> damped = gram;
            for (std::size_t a = 0; a < k; ++a) {
                const double dia = damped[a * k + a];
                // Insensitive directions get an absolute floor so the system
                // stays solvable (flagged later via the eigenvalue spread).
                damped[a * k + a] = dia + lambda * std::max(dia, 1e-30 * max_diag + 1e-300);
            }
            std::vector<double> neg_g(k);
            for (std::size_t a = 0; a < k; ++a) neg_g[a] = -g[a];
            if (solve_linear(damped, neg_g, k, delta)) {
                t_new = out.t;
                for (std::size_t a = 0; a < k; ++a)
                    t_new[a] = std::clamp(t_new[a] + delta[a], bounds[a].first,
                                          bounds[a].second);
                ssr_new = obj.ssr(t_new);
                if (ssr_new <= out.ssr) {
                    accepted = true;
                    lambda = std::max(lambda * 0.3, 1e-12);
                    break;
                }
            }
            lambda = std::min(lambda * 8.0, 1e15);
        }
        if (!accepted) {
            out.stalled = true;
            break;
        }

        double step_norm = 0.0, t_norm = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            step_norm += (t_new[a] - out.t[a]) * (t_new[a] - out.t[a]);
            t_norm += t_new[a] * t_new[a];
        }
        step_norm = std::sqrt(step_norm);
        t_norm = std::sqrt(t_norm);

        const double decrease = out.ssr - ssr_new;
        out.t = t_new;
        out.ssr = ssr_new;
        out.iterations = iter;
        out.history.push_back(ssr_new);
        if (decrease <= tol_residual_rel * std::max(out.ssr, 1e-300) ||
            step_norm <= tol_step * (1.0 + t_norm)) {
            out.converged = true;
            break;
        }
    }
    return out;
}

double initial_scale(double f, std::array<double, fit_param_count> params,
                     const double peak_hz, const double peak_value) {
    params[index_of(FitParam::scale)] = 1.0;
    const std::vector<double> probe{peak_hz};
    const double unit = evaluate_model(f, params, probe).front();
    if (!(unit > 0.0) || !std::isfinite(unit)) return std::max(peak_value, 1e-30);
    return std::max(peak_value / unit, 1e-30);
}

} // namespace

// ---------------------------------------------------------------------------

std::string to_string(FitParam p) {
    switch (p) {
        case FitParam::scale: return "scale";
        case FitParam::epsilon: return "epsilon";
        case FitParam::gamma_com: return "gamma_com";
        case FitParam::gamma_pump: return "gamma_pump";
        case FitParam::omega_center: return "omega_center";
        case FitParam::omega_split: return "omega_split";
    }
    throw DomainError("unknown fit parameter");
}

FitParam fit_param_from_string(const std::string& name) {
    for (std::size_t i = 0; i < fit_param_count; ++i)
        if (name == to_string(static_cast<FitParam>(i))) return static_cast<FitParam>(i);
    throw DomainError("unknown fit parameter: " + name);
}

std::vector<double> evaluate_model(double f,
                                   const std::array<double, fit_param_count>& params,
                                   const std::vector<double>& omega_grid_hz) {
    SpinModel model;
    model.f = f;
    model.n4 = 1.0;
    model.epsilon = params[index_of(FitParam::epsilon)];
    model.gamma_com_hz = params[index_of(FitParam::gamma_com)];
    model.gamma_pump_hz = params[index_of(FitParam::gamma_pump)];
    model.omega_center_hz = params[index_of(FitParam::omega_center)];
    model.omega_split_hz = params[index_of(FitParam::omega_split)];
    model.amplitude = params[index_of(FitParam::scale)];
    // Normalized populations make `scale` the full amplitude * N^2 product.
    const PopulationDistribution pops = normalized(model_populations(model));
    return mors(model, pops, omega_grid_hz).value;
}

SpinModel FitResult::model(double f) const {
    SpinModel model;
    model.f = f;
    model.epsilon = parameters[index_of(FitParam::epsilon)];
    model.gamma_com_hz = parameters[index_of(FitParam::gamma_com)];
    model.gamma_pump_hz = parameters[index_of(FitParam::gamma_pump)];
    model.omega_center_hz = parameters[index_of(FitParam::omega_center)];
    model.omega_split_hz = parameters[index_of(FitParam::omega_split)];
    model.amplitude = parameters[index_of(FitParam::scale)];
    model.n4 = 1.0 / populations_from_epsilon(f, 1.0, model.epsilon).sum();
    return model;
}

FitResult fit(const SpectrumTrace& trace, const FitProblem& problem) {
    require_trace(trace, 3);
    Objective obj;
    obj.f = problem.f;
    obj.grid = &trace.frequency_hz;
    obj.values = &trace.value;
    obj.params = problem.start;
    obj.transform = Transform{problem.f, problem.parametrize_orientation};
    for (std::size_t i = 0; i < fit_param_count; ++i)
        if (problem.free[i]) obj.free_idx.push_back(i);
    if (obj.free_idx.empty()) throw DomainError("fit needs at least one free parameter");
    if (trace.size() < obj.free_idx.size())
        throw DomainError("fewer trace points than free parameters");

    const std::size_t n = trace.size();
    const std::size_t k = obj.free_idx.size();

    obj.sqrt_w.resize(n);
    if (!problem.weights.empty()) {
        if (problem.weights.size() != n)
            throw DomainError("weight vector length does not match the trace");
        for (std::size_t i = 0; i < n; ++i) {
            if (!(problem.weights[i] >= 0.0)) throw DomainError("weights must be >= 0");
            obj.sqrt_w[i] = std::sqrt(problem.weights[i]);
        }
    } else if (problem.poisson_weights) {
        const double peak = *std::max_element(trace.value.begin(), trace.value.end());
        const double floor_value =
            problem.weight_floor > 0.0 ? problem.weight_floor : 1e-3 * std::max(peak, 1e-300);
        for (std::size_t i = 0; i < n; ++i)
            obj.sqrt_w[i] = 1.0 / std::sqrt(std::max(trace.value[i], floor_value));
    } else {
        std::fill(obj.sqrt_w.begin(), obj.sqrt_w.end(), 1.0);
    }

    std::vector<std::pair<double, double>> bounds(k);
    std::vector<double> t0(k);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t i = obj.free_idx[j];
        bounds[j] = obj.transform.internal_bounds(i, problem.bounds[i]);
        if (!(bounds[j].first < bounds[j].second))
            throw DomainError("invalid bounds for parameter " +
                              to_string(static_cast<FitParam>(i)));
        t0[j] = obj.transform.to_internal(i, problem.start[i]);
    }

    DescentOutcome best = run_descent(obj, t0, bounds, problem.tol_residual_rel,
                                      problem.tol_step, problem.max_iterations);
    int restarts_used = 0;

    double y_norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        y_norm2 += obj.sqrt_w[i] * obj.sqrt_w[i] * trace.value[i] * trace.value[i];
    auto relative = [&](double ssr) {
        return y_norm2 > 0.0 ? std::sqrt(ssr / y_norm2) : std::sqrt(ssr);
    };

    if ((!best.converged || relative(best.ssr) > problem.restart_threshold) &&
        problem.restarts > 0) {
        // Latin-hypercube restarts around the original seed: one stratified
        // sample per free parameter per restart, deterministic in the seed.
        const int R = problem.restarts;
        std::mt19937_64 rng(problem.restart_seed);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        const double span = trace.frequency_hz.back() - trace.frequency_hz.front();
        std::vector<double> range(k);
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t i = obj.free_idx[j];
            if (i == index_of(FitParam::omega_center))
                range[j] = 0.5 * span;
            else if (i == index_of(FitParam::omega_split))
                range[j] = 0.25 * span;
            else if (i == index_of(FitParam::epsilon) && problem.parametrize_orientation)
                range[j] = 1.0;
            else
                range[j] = std::log(256.0); // x/÷16 around the seed
        }
        std::vector<std::vector<int>> strata(k, std::vector<int>(R));
        for (std::size_t j = 0; j < k; ++j) {
            std::iota(strata[j].begin(), strata[j].end(), 0);
            std::shuffle(strata[j].begin(), strata[j].end(), rng);
        }
        for (int rstart = 0; rstart < R; ++rstart) {
            std::vector<double> ts(k);
            for (std::size_t j = 0; j < k; ++j) {
                const double u = (strata[j][rstart] + uniform(rng)) / R - 0.5;
                ts[j] = std::clamp(t0[j] + range[j] * u, bounds[j].first, bounds[j].second);
            }
            ++restarts_used;
            DescentOutcome candidate =
                run_descent(obj, ts, bounds, problem.tol_residual_rel, problem.tol_step,
                            problem.max_iterations);
            if (candidate.ssr < best.ssr) best = candidate;
            if (best.converged && relative(best.ssr) <= problem.restart_threshold) break;
        }
    }

    FitResult result;
    result.parameters = obj.physical(best.t);
    bool moved = false;
    for (std::size_t j = 0; j < k; ++j) {
        if (best.t[j] == t0[j]) {
            // Coordinate never left the seed: echo the caller's value back
            // bitwise instead of the exp(log(x)) round trip.
            result.parameters[obj.free_idx[j]] = problem.start[obj.free_idx[j]];
        } else {
            moved = true;
        }
    }
    // Without the pump profile the power spectrum cannot distinguish
    // (epsilon, omega_split) from (1/epsilon, -omega_split): the populations
    // mirror in m and every line maps onto its partner with the same weight
    // and width. Report the orientation >= 0 representative of that exact
    // two-fold optimum.
    const bool split_free = problem.free[index_of(FitParam::omega_split)];
    if (moved && problem.free[index_of(FitParam::epsilon)] &&
        result.parameters[index_of(FitParam::gamma_pump)] == 0.0 &&
        result.parameters[index_of(FitParam::epsilon)] > 1.0 &&
        (split_free || result.parameters[index_of(FitParam::omega_split)] == 0.0)) {
        double& eps = result.parameters[index_of(FitParam::epsilon)];
        eps = 1.0 / eps;
        if (split_free) {
            double& split = result.parameters[index_of(FitParam::omega_split)];
            split = split == 0.0 ? 0.0 : -split;
        }
    }
    result.converged = best.converged;
    result.iterations = best.iterations;
    result.restarts_used = restarts_used;
    result.residual_norm = std::sqrt(std::max(best.ssr, 0.0));
    result.relative_residual = relative(best.ssr);
    result.objective_history = best.history;
    if (best.stalled) result.message = "descent stalled before meeting tolerances";

    // Local curvature at the optimum: uncertainties and degeneracy report.
    std::vector<std::vector<double>> jac;
    std::vector<double> r;
    if (obj.residuals(best.t, r) && obj.jacobian(best.t, jac)) {
        std::vector<double> gram(k * k, 0.0);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = a; b < k; ++b) {
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) acc += jac[a][i] * jac[b][i];
                gram[a * k + b] = acc;
                gram[b * k + a] = acc;
            }
        const std::vector<double> eig = sym_eigenvalues(gram, k);
        const double eig_max = eig.back();
        const double eig_min = eig.front();
        result.sensitivity_condition =
            eig_min > 0.0 ? eig_max / eig_min : std::numeric_limits<double>::infinity();
        result.degenerate = !(eig_min > 1e-12 * eig_max);
        if (result.degenerate) {
            if (!result.message.empty()) result.message += "; ";
            result.message +=
                "near-singular sensitivity: parameters are degenerate on this trace "
                "(see degeneracy_scan)";
        }
        if (n > k) {
            const double variance = best.ssr / static_cast<double>(n - k);
            std::vector<double> identity(k, 0.0), col;
            std::vector<double> cov_diag(k, 0.0);
            bool ok = true;
            for (std::size_t a = 0; a < k && ok; ++a) {
                std::fill(identity.begin(), identity.end(), 0.0);
                identity[a] = 1.0;
                ok = solve_linear(gram, identity, k, col);
                if (ok) cov_diag[a] = col[a];
            }
            if (ok) {
                for (std::size_t j = 0; j < k; ++j) {
                    const std::size_t i = obj.free_idx[j];
                    const double sigma_t = std::sqrt(std::max(cov_diag[j] * variance, 0.0));
                    const double physical = result.parameters[i];
                    result.uncertainty[i] =
                        obj.transform.is_log(i) ? std::abs(physical) * sigma_t : sigma_t;
                }
            }
        }
    }

    result.orientation = orientation_of_epsilon(
        problem.f, result.parameters[index_of(FitParam::epsilon)]);
    result.n_rel = std::sqrt(result.parameters[index_of(FitParam::scale)]);
    result.j_z = result.n_rel * problem.f * result.orientation;
    const int lines = static_cast<int>(std::llround(2.0 * problem.f));
    for (int line = 0; line < lines; ++line) {
        const double m = -problem.f + line;
        result.line_centers_hz.push_back(resonance_frequency_hz(
            problem.f, m, result.parameters[index_of(FitParam::omega_center)],
            result.parameters[index_of(FitParam::omega_split)]));
        result.line_widths_hz.push_back(
            linewidth_hz(problem.f, m, result.parameters[index_of(FitParam::gamma_com)],
                         result.parameters[index_of(FitParam::gamma_pump)]));
    }
    return result;
}

FitProblem initialize(const SpectrumTrace& trace, double f, double nu_hfs_hz) {
    const PeakScan scan = scan_peaks(trace);

    FitProblem problem;
    problem.f = f;
    problem.start[index_of(FitParam::omega_center)] = scan.peak_hz;
    problem.start[index_of(FitParam::gamma_com)] = std::max(scan.fwhm_hz, 1e-9);
    problem.start[index_of(FitParam::gamma_pump)] = 0.0;

    // Splitting seed: median spacing of detected maxima; single-feature
    // traces fall back to the quadratic Zeeman splitting of the inferred
    // precession frequency.
    double split = 0.0;
    if (scan.maxima.size() >= 2) {
        std::vector<double> spacings;
        for (std::size_t i = 1; i < scan.maxima.size(); ++i)
            spacings.push_back(std::abs(trace.frequency_hz[scan.maxima[i]] -
                                        trace.frequency_hz[scan.maxima[i - 1]]));
        std::sort(spacings.begin(), spacings.end());
        split = spacings[spacings.size() / 2];
    } else {
        split = qz_splitting_hz(std::abs(scan.peak_hz), nu_hfs_hz);
    }
    problem.start[index_of(FitParam::omega_split)] = split;

    // Population seed from the two tallest adjacent maxima; a lone peak
    // says nothing about the ladder, so fall back to a half-pumped guess.
    double epsilon = 0.5;
    if (scan.maxima.size() >= 2) {
        std::size_t tallest = scan.maxima.front();
        for (std::size_t idx : scan.maxima)
            if (scan.smoothed[idx] > scan.smoothed[tallest]) tallest = idx;
        double neighbor = 0.0;
        for (std::size_t i = 0; i < scan.maxima.size(); ++i) {
            if (scan.maxima[i] != tallest) continue;
            if (i > 0) neighbor = std::max(neighbor, scan.smoothed[scan.maxima[i - 1]]);
            if (i + 1 < scan.maxima.size())
                neighbor = std::max(neighbor, scan.smoothed[scan.maxima[i + 1]]);
        }
        if (neighbor > 0.0)
            epsilon = std::clamp(std::sqrt(neighbor / scan.smoothed[tallest]), 0.05, 0.95);
    }
    problem.start[index_of(FitParam::epsilon)] = epsilon;

    problem.start[index_of(FitParam::scale)] =
        initial_scale(f, problem.start, scan.peak_hz, scan.peak_value);
    return problem;
}

std::vector<double> sensitivity_spectrum(const SpectrumTrace& trace,
                                         const FitProblem& problem) {
    require_trace(trace, 3);
    Objective obj;
    obj.f = problem.f;
    obj.grid = &trace.frequency_hz;
    obj.values = &trace.value;
    obj.params = problem.start;
    obj.transform = Transform{problem.f, problem.parametrize_orientation};
    for (std::size_t i = 0; i < fit_param_count; ++i)
        if (problem.free[i]) obj.free_idx.push_back(i);
    if (obj.free_idx.empty()) throw DomainError("need at least one free parameter");
    obj.sqrt_w.assign(trace.size(), 1.0);

    const std::size_t k = obj.free_idx.size();
    std::vector<double> t(k);
    for (std::size_t j = 0; j < k; ++j)
        t[j] = obj.transform.to_internal(obj.free_idx[j], problem.start[obj.free_idx[j]]);
    std::vector<std::vector<double>> jac;
    if (!obj.jacobian(t, jac))
        throw SingularError("model not evaluable around the start point");
    std::vector<double> gram(k * k, 0.0);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a; b < k; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < jac[a].size(); ++i) acc += jac[a][i] * jac[b][i];
            gram[a * k + b] = acc;
            gram[b * k + a] = acc;
        }
    return sym_eigenvalues(gram, k);
}

ConsistencyReport consistency_check(const std::vector<double>& j_z,
                                    const std::vector<double>& theta_dc) {
    const std::size_t n = j_z.size();
    if (n != theta_dc.size()) throw DomainError("series lengths differ");
    if (n < 3) throw DomainError("need at least three points for the regression");

    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += theta_dc[i];
        mean_y += j_z[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0, rms_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = theta_dc[i] - mean_x;
        const double dy = j_z[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
        rms_y += j_z[i] * j_z[i];
    }
    rms_y = std::sqrt(rms_y / static_cast<double>(n));
    if (!(sxx > 0.0))
        throw EstimationError("degenerate spread: all angles coincide");

    ConsistencyReport report;
    report.points = n;
    report.slope = sxy / sxx;
    report.intercept = mean_y - report.slope * mean_x;
    report.relative_intercept =
        rms_y > 0.0 ? report.intercept / rms_y : report.intercept;
    report.correlation = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
    return report;
}

ConsistencyReport consistency_check(const std::vector<FitResult>& fits,
                                    const std::vector<double>& theta_dc) {
    std::vector<double> j_z(fits.size());
    for (std::size_t i = 0; i < fits.size(); ++i) j_z[i] = fits[i].j_z;
    return consistency_check(j_z, theta_dc);
}

double DegeneracyScan::inversion_interval_width(double jz_relative_accuracy,
                                                std::optional<double> reference_p) const {
    if (points.size() < 2) throw DomainError("scan needs at least two points");
    if (!(jz_relative_accuracy > 0.0)) throw DomainError("accuracy must be positive");
    const double p_ref = reference_p.value_or(points.back().p);

    auto j_at = [&](double p) {
        if (p <= points.front().p) return points.front().j_z;
        if (p >= points.back().p) return points.back().j_z;
        for (std::size_t i = 1; i < points.size(); ++i) {
            if (p <= points[i].p) {
                const double w =
                    (p - points[i - 1].p) / (points[i].p - points[i - 1].p);
                return (1.0 - w) * points[i - 1].j_z + w * points[i].j_z;
            }
        }
        return points.back().j_z;
    };
    const double j_ref = j_at(p_ref);
    const double lo = std::abs(j_ref) * (1.0 - jz_relative_accuracy);
    const double hi = std::abs(j_ref) * (1.0 + jz_relative_accuracy);

    // Dense walk of the piecewise-linear curve: the contiguous in-band
    // orientation interval containing the reference.
    const std::size_t samples = 20001;
    const double p_min = points.front().p, p_max = points.back().p;
    auto in_band = [&](double p) {
        const double j = std::abs(j_at(p));
        return j >= lo && j <= hi;
    };
    if (!in_band(std::clamp(p_ref, p_min, p_max))) return 0.0;
    const double dp = (p_max - p_min) / static_cast<double>(samples - 1);
    double left = std::clamp(p_ref, p_min, p_max);
    while (left - dp >= p_min && in_band(left - dp)) left -= dp;
    double right = std::clamp(p_ref, p_min, p_max);
    while (right + dp <= p_max && in_band(right + dp)) right += dp;
    return right - left;
}

DegeneracyScan degeneracy_scan(const SpectrumTrace& trace,
                               const std::vector<double>& p_grid, double f) {
    if (p_grid.empty()) throw DomainError("orientation grid must be non-empty");
    const PeakScan scan = scan_peaks(trace);

    DegeneracyScan result;
    for (double p : p_grid) {
        if (!(p > 0.0) || p > 1.0)
            throw DomainError("scanned orientations must lie in (0, 1]");
        FitProblem problem;
        problem.f = f;
        problem.free = {true, false, false, true, false, false};
        problem.start[index_of(FitParam::epsilon)] = epsilon_from_orientation(f, p);
        problem.start[index_of(FitParam::gamma_com)] = 0.0;
        problem.start[index_of(FitParam::gamma_pump)] = std::max(scan.fwhm_hz, 1e-6);
        problem.start[index_of(FitParam::omega_center)] = scan.peak_hz;
        problem.start[index_of(FitParam::omega_split)] = 0.0;
        problem.start[index_of(FitParam::scale)] =
            initial_scale(f, problem.start, scan.peak_hz, scan.peak_value);
        problem.restarts = 2;

        const FitResult fit_result = fit(trace, problem);
        DegeneracyScanPoint point;
        point.p = p;
        point.epsilon = problem.start[index_of(FitParam::epsilon)];
        point.scale = fit_result.parameters[index_of(FitParam::scale)];
        point.gamma_pump_hz = fit_result.parameters[index_of(FitParam::gamma_pump)];
        point.j_z = std::sqrt(point.scale) * f * p;
        point.relative_residual = fit_result.relative_residual;
        point.converged = fit_result.converged;
        result.points.push_back(point);
    }
    std::sort(result.points.begin(), result.points.end(),
              [](const DegeneracyScanPoint& a, const DegeneracyScanPoint& b) {
                  return a.p < b.p;
              });
    return result;
}

} // namespace morsekit
