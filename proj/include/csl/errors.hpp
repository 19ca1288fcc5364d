// Exception taxonomy: every failure thrown by this library derives from csl::Error.
#pragma once

#include <stdexcept>
#include <string>

namespace csl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A covariance matrix failed a positive-definiteness / physicality factorization.
struct NonPositiveDefinite : Error {
    using Error::Error;
};

// Drift matrix has a non-decaying mode; Lyapunov steady state does not exist.
struct UnstableDrift : Error {
    using Error::Error;
};

// Adaptive propagation step collapsed below the resolvable floor.
struct StepUnderflow : Error {
    using Error::Error;
};

// Closed-form coefficient denominator vanished (parameters on a resonance manifold).
struct DegenerateDenominator : Error {
    using Error::Error;
};

// Adaptive quadrature could not reach the requested tolerance.
struct QuadratureFailure : Error {
    using Error::Error;
};

// Density grid too coarse relative to the smearing length.
struct ResolutionTooCoarse : Error {
    using Error::Error;
};

// Finite-l measurement covariance requested for the homodyne limit.
struct HomodyneNotFinite : Error {
    using Error::Error;
};

// State-plus-measurement covariance not positive definite.
struct SingularMeasCov : Error {
    using Error::Error;
};

// Mixedness guard tripped: state too close to pure for the compact QFI formula.
struct NearPure : Error {
    using Error::Error;
};

// SLD construction divergent: vanishing denominator with nonzero numerator.
struct PureStateDivergence : Error {
    using Error::Error;
};

// Richardson step-size extrapolations failed to agree.
struct StepSelectionFailure : Error {
    using Error::Error;
};

// A measurement outcome probability underflowed to (effectively) zero.
struct DegenerateOutcome : Error {
    using Error::Error;
};

// Argument outside the mathematical domain of the function.
struct DomainError : Error {
    using Error::Error;
};

// Eigenvalue structure too degenerate for the requested spectral construction.
struct DegenerateSpectrum : Error {
    using Error::Error;
};

// Config-text syntax error; carries the 1-based line number.
struct ParseError : Error {
    int line;
    ParseError(int line_, const std::string& msg)
        : Error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

// Config semantic error; carries the offending key.
struct ValidationError : Error {
    std::string key;
    explicit ValidationError(const std::string& key_, const std::string& msg = "")
        : Error("invalid value for '" + key_ + "'" + (msg.empty() ? "" : ": " + msg)),
          key(key_) {}
};

// File/stream failure.
struct IoError : Error {
    using Error::Error;
};

} // namespace csl
