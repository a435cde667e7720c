#pragma once

#include <stdexcept>
#include <string>

namespace rfsa {

/// Bad caller input: non-finite values, broken preconditions, mode mismatches.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation (e.g. |x| > 2).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A sin(ω·τ) denominator fell inside the numeric guard.
class NumericGuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by amplitude/phase recovery when the component is the ω→0 line limit.
class TrendComponent : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Normal equations that cannot be solved reliably.
class SingularSystemError : public std::runtime_error {
public:
    SingularSystemError(const std::string& what, double condition)
        : std::runtime_error(what + " (condition estimate " + std::to_string(condition) + ")"),
          condition_(condition) {}

    [[nodiscard]] double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// Malformed input file. Line numbers are 1-based; 0 means "not line specific".
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace rfsa
