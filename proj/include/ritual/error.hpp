#pragma once

#include <stdexcept>
#include <string>

namespace ritual {

/// Base of every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI exit codes and service error bodies.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

/// Malformed XML. Carries the 1-based position reported by the parser.
class ParseError : public Error {
public:
    ParseError(const std::string& source, int line, int column, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }
    const char* kind() const noexcept override { return "parse_error"; }

private:
    int line_;
    int column_;
};

class ValidationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "validation_error"; }
};

/// Dangling cross-reference between corpus files.
class ResolutionError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "resolution_error"; }
};

class LookupError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "lookup_error"; }
};

class DomainError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "domain_error"; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "config_error"; }
};

class EvaluationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "evaluation_error"; }
};

class IoError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "io_error"; }
};

} // namespace ritual
