#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace spinspec {

// Base type for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid numeric input: non-finite values or physics parameters out of range.
struct DomainError : Error {
    using Error::Error;
};

// Malformed request: empty grids, unknown flags, inconsistent fit setup.
struct UsageError : Error {
    using Error::Error;
};

// File could not be parsed; carries the 1-based line number when known.
struct ParseError : Error {
    explicit ParseError(const std::string& msg, long line_number = -1)
        : Error(line_number > 0 ? msg + " (line " + std::to_string(line_number) + ")" : msg),
          line(line_number) {}
    long line;
};

// Tensor-modified damping came out non-positive: the oscillator self-oscillates.
// Reported, never clamped.
struct InstabilityError : Error {
    explicit InstabilityError(const std::string& msg, double gamma_prime_value)
        : Error(msg), gamma_prime(gamma_prime_value) {}
    double gamma_prime;
};

// The virtual-shift radicand went negative; carries the phase at which the
// effective frequency reaches zero.
struct OverSoftenedError : Error {
    explicit OverSoftenedError(const std::string& msg, double phi_critical_value)
        : Error(msg), phi_critical(phi_critical_value) {}
    double phi_critical;
};

// Force normalization diverges in the amplitude quadrature (cos(phi) -> 0).
struct DivergentNormalizationError : Error {
    using Error::Error;
};

// Normal equations are singular; names the parameters that cannot be
// identified from the supplied data.
struct RankDeficiencyError : Error {
    RankDeficiencyError(const std::string& msg, std::vector<std::string> names)
        : Error(msg), parameters(std::move(names)) {}
    std::vector<std::string> parameters;
};

// Least-squares fit failed to converge within the iteration budget.
struct FitError : Error {
    using Error::Error;
};

// Population distribution is too symmetric to assign an effective mass sign.
struct IndeterminateMassError : Error {
    using Error::Error;
};

}  // namespace spinspec
