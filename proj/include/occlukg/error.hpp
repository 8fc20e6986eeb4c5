#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace occlukg {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-positive or non-finite numeric input to a labeling utility.
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed XML. Line and column are 1-based, as reported by the reader.
class ParseError : public Error {
public:
    ParseError(std::string message, std::size_t line, std::size_t column)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                message),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

// Well-formed input that breaks a schema rule or a type invariant.
class ValidationError : public Error {
public:
    ValidationError(std::string element, std::string rule)
        : Error("<" + element + ">: " + rule), element_(std::move(element)), rule_(std::move(rule)) {}

    const std::string& element() const noexcept { return element_; }
    const std::string& rule() const noexcept { return rule_; }

private:
    std::string element_;
    std::string rule_;
};

// Knowledge-graph construction or consistency failure.
class GraphError : public Error {
public:
    using Error::Error;
};

// Infeasible corpus split.
class SplitError : public Error {
public:
    using Error::Error;
};

// Numerical failure during training (non-finite loss or parameters).
class TrainingError : public Error {
public:
    using Error::Error;
};

// Bad configuration value, unknown key or infeasible experiment.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace occlukg
