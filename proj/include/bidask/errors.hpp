#pragma once

#include <stdexcept>
#include <string>

namespace bidask {

// Ask price below bid price (a < b) passed to an operation that needs a
// valid bid-ask interval.
struct InvalidSpreadError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Value recursion produced a function unbounded below, payoff never
// exercisable, or similar model-level inconsistency.
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Initial endowment not sufficient to start a hedging strategy.
struct InsufficientEndowmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Query point outside the essential domain of a concave function.
struct OutOfDomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Enumeration or LP size exceeds the configured budget.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    int line;
    ParseError(int line_, const std::string& what_)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what_), line(line_) {}
};

}  // namespace bidask
