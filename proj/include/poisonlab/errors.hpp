#pragma once

#include <stdexcept>
#include <string>

namespace poisonlab {

// Base error; the CLI maps subclasses to exit codes (config/contract -> 2,
// numeric -> 3, io -> 4).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContractViolation : Error { using Error::Error; };
struct NumericFailure : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct BudgetError : Error { using Error::Error; };
struct PlanConflict : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct InsufficientVariance : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractViolation(msg);
}

} // namespace poisonlab
