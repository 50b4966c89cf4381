#pragma once

#include <stdexcept>
#include <string>

namespace morsekit {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid physical arguments: quantum numbers outside their range,
/// non-positive widths where positive ones are required, |p| > 1, ...
class DomainError : public Error {
public:
    using Error::Error;
};

/// Semantically invalid configuration (unknown key, missing required key,
/// inconsistent values). CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input trace file. Carries a 1-based line number when known.
/// CLI exit code 3. (Config problems, syntactic or semantic, are
/// ConfigError: exit code 2.)
class ParseError : public Error {
public:
    ParseError(const std::string& what, long line = -1)
        : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

/// An iterative scheme exhausted its cycle/iteration budget. Carries the
/// diagnostics available at the point of failure. CLI exit code 4.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, long iterations, double last_delta)
        : Error(what + " (iterations=" + std::to_string(iterations) +
                ", last_delta=" + std::to_string(last_delta) + ")"),
          iterations_(iterations),
          last_delta_(last_delta) {}

    long iterations() const noexcept { return iterations_; }
    double last_delta() const noexcept { return last_delta_; }

private:
    long iterations_;
    double last_delta_;
};

/// A response or linear system is singular (zero linewidth on resonance,
/// non-invertible one-period map, ...). CLI exit code 5.
class SingularError : public Error {
public:
    using Error::Error;
};

/// Data-driven estimation failed: no identifiable peak, flat trace,
/// degenerate regression spread. CLI exit code 5.
class EstimationError : public Error {
public:
    using Error::Error;
};

} // namespace morsekit
