#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace schedsec {

enum class ErrorCode {
    invalid_argument,
    validation,
    infeasible,
    budget_exceeded,
    convergence,
    numerical,
    io,
};

const char *to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so the C
// layer can map it to a status without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string &what, double residual)
        : Error(ErrorCode::convergence, what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

[[noreturn]] void throw_invalid(const std::string &what);
[[noreturn]] void throw_validation(const std::string &what);

/// Cap on exhaustive enumeration sizes (schedule search, brute-force attacks,
/// invariance checks).
struct Budget {
    std::uint64_t max_enumeration = 10'000'000;

    /// Reads SCHEDSEC_BUDGET; falls back to the default when unset or bad.
    static Budget from_env();
};

/// Throws budget_exceeded when `needed` exceeds the cap.
void require_budget(const Budget &budget, std::uint64_t needed, const std::string &what);

/// base^exp saturating at UINT64_MAX.
std::uint64_t saturating_pow(std::uint64_t base, std::uint64_t exp) noexcept;

} // namespace schedsec
