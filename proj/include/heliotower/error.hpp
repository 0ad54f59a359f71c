#pragma once

#include <stdexcept>
#include <string>

namespace heliotower {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument violates a documented precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// The layout configuration cannot host the requested number of heliostats.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// A design produces no energy; its objective is undefined.
class InfeasibleDesign : public Error {
public:
    using Error::Error;
};

/// Malformed input text. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line = 0, int column = 0)
        : Error(format(what, line, column)), line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

    /// Same error with `prefix` (usually a file name) in front of the message.
    ParseError prefixed(const std::string& prefix) const { return ParseError(Raw{}, prefix + what(), line_, column_); }

private:
    struct Raw {};
    ParseError(Raw, const std::string& text, int line, int column) : Error(text), line_(line), column_(column) {}

    static std::string format(const std::string& what, int line, int column) {
        if (line <= 0) return what;
        return std::to_string(line) + ":" + std::to_string(column) + ": " + what;
    }

    int line_;
    int column_;
};

/// Hessian at the claimed minimum is not positive definite.
class NotPositiveDefinite : public Error {
public:
    NotPositiveDefinite(const std::string& what, double eigenvalue, int index)
        : Error(what), eigenvalue_(eigenvalue), index_(index) {}

    double eigenvalue() const noexcept { return eigenvalue_; }
    int index() const noexcept { return index_; }

private:
    double eigenvalue_;
    int index_;
};

/// No finite-difference step satisfies the acceptance criteria; usually the
/// point is not a minimum or the objective is too noisy.
class StepSelectionError : public Error {
public:
    using Error::Error;
};

}  // namespace heliotower
