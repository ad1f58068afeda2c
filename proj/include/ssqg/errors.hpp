#pragma once

#include <stdexcept>
#include <string>

namespace ssqg {

// Bad argument to an operation (negative radius, xi <= 0, k out of range, ...).
struct DomainError : std::invalid_argument {
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// A documented caller obligation was violated (kappa outside the monotone
// range of g, monitor started on data that already breaks the modulus, ...).
struct PreconditionError : std::invalid_argument {
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

// A search or verification could not produce the certified object
// (no r0 below the scan cap, B search exceeded 1e300, unstable bound ratio).
struct CertificationError : std::runtime_error {
    explicit CertificationError(const std::string& what) : std::runtime_error(what) {}
};

// Quadrature or root solving failed to reach the requested tolerance.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Time stepping produced NaN/overflow or the gradient exceeded the blow-up
// threshold. `time` is the last valid solution time.
struct BlowUpError : std::runtime_error {
    double time;
    BlowUpError(double t, const std::string& what) : std::runtime_error(what), time(t) {}
};

// Malformed config / flags. CLI maps this to exit code 64.
struct UsageError : std::invalid_argument {
    explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace ssqg
