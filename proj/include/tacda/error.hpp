#pragma once

#include <stdexcept>
#include <string>

namespace tacda {

// Violated precondition or broken internal contract (caller bug).
struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

// Malformed input data (bad file contents, wrong field count, ...).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem / serialization failures (missing file, bad magic, truncation).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractViolation(msg);
}

}  // namespace tacda
