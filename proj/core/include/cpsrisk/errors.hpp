#pragma once

#include <stdexcept>
#include <string>

namespace cpsrisk {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid construction parameters or inconsistent configuration values.
struct ConfigError : Error {
    using Error::Error;
};

// Malformed input text; carries the 1-based line number of the offending line.
struct ParseError : Error {
    ParseError(const std::string& msg, int line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    int line_number;
};

// Ball-and-bin placement cannot satisfy the capacity precondition.
struct AllocationError : Error {
    using Error::Error;
};

// A recovery-profile value sits in a denominator and is zero.
struct SingularProfileError : Error {
    explicit SingularProfileError(const std::string& term)
        : Error("singular recovery profile: " + term + " is zero"), offending_term(term) {}
    std::string offending_term;
};

// Every cyber node is down while monitoring load remains to be carried.
struct TotalCollapseError : Error {
    using Error::Error;
};

// A metric's denominator is zero (e.g. no pre-excision load).
struct UndefinedMetricError : Error {
    using Error::Error;
};

// Instance exceeds a hard enumeration bound.
struct SizeBoundError : Error {
    using Error::Error;
};

}  // namespace cpsrisk
