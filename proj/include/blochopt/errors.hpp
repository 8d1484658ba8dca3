#pragma once

#include <stdexcept>
#include <string>

namespace blochopt {

// Caller broke a documented precondition; these are bugs, not runtime conditions.
struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// Linear solve refused: condition estimate above the caller's threshold.
struct IllConditioned : std::runtime_error {
    double condition;
    IllConditioned(const std::string& what, double cond)
        : std::runtime_error(what), condition(cond) {}
};

// No finite-objective starting point found after the redraw budget.
struct InfeasibleStart : std::runtime_error {
    explicit InfeasibleStart(const std::string& what) : std::runtime_error(what) {}
};

// Expression text rejected; position is a 0-based byte offset into the input.
struct ParseError : std::runtime_error {
    std::size_t position;
    ParseError(const std::string& what, std::size_t pos)
        : std::runtime_error(what), position(pos) {}
};

// Run configuration failed validation; message lists every problem found.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace blochopt
