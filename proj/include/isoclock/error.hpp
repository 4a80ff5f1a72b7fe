#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace isoclock {

// Base for every error raised by the library. Callers that only care about
// "something went wrong" can catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed text input. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(format(what, line, column)), line_(line), column_(column), message_(what) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& message() const noexcept { return message_; }

private:
    static std::string format(const std::string& what, std::size_t line, std::size_t column) {
        if (line == 0) return what;
        return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what;
    }

    std::size_t line_;
    std::size_t column_;
    std::string message_;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

// Input that parses but violates a model constraint (bad rates, empty
// ensembles, out-of-range parameters).
class DomainError : public Error {
public:
    using Error::Error;
};

// Iterative fit failed to converge or was started in an ambiguous place.
class FitError : public Error {
public:
    using Error::Error;
};

}  // namespace isoclock
