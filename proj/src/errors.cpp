#include "schedsec/errors.hpp"

#include <cstdlib>
#include <limits>

namespace schedsec {

const char *to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::validation: return "validation error";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::budget_exceeded: return "budget exceeded";
    case ErrorCode::convergence: return "convergence failure";
    case ErrorCode::numerical: return "numerical error";
    case ErrorCode::io: return "i/o error";
    }
    return "unknown error";
}

void throw_invalid(const std::string &what) { throw Error(ErrorCode::invalid_argument, what); }

void throw_validation(const std::string &what) { throw Error(ErrorCode::validation, what); }

Budget Budget::from_env() {
    Budget b;
    if (const char *raw = std::getenv("SCHEDSEC_BUDGET")) {
        char *end = nullptr;
        const unsigned long long v = std::strtoull(raw, &end, 10);
        if (end != raw && *end == '\0' && v > 0)
            b.max_enumeration = v;
    }
    return b;
}

void require_budget(const Budget &budget, std::uint64_t needed, const std::string &what) {
    if (needed > budget.max_enumeration) {
        throw Error(ErrorCode::budget_exceeded,
                    what + " needs " + (needed == std::numeric_limits<std::uint64_t>::max()
                                            ? std::string("more than 2^64")
                                            : std::to_string(needed)) +
                        " evaluations, budget is " + std::to_string(budget.max_enumeration) +
                        "; use a smaller period or raise SCHEDSEC_BUDGET");
    }
}

std::uint64_t saturating_pow(std::uint64_t base, std::uint64_t exp) noexcept {
    constexpr auto max = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < exp; ++i) {
        if (base != 0 && r > max / base)
            return max;
        r *= base;
    }
    return r;
}

} // namespace schedsec
