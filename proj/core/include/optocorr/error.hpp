#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace optocorr {

/// Base of everything the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-physical or inconsistent input. Carries the offending parameter name.
class ValidationError : public Error {
public:
    ValidationError(std::string key, const std::string& what)
        : Error(key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Quantity undefined because there is no measurement (C = 0 or eta = 0).
class NoMeasurementError : public Error {
public:
    using Error::Error;
};

/// sin(theta) = 0 where a division by it is required.
class DegenerateAngleError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    using Error::Error;
};

/// Band outside the spectrum grid, overlapping, or too sparsely sampled.
class BandError : public Error {
public:
    using Error::Error;
};

class GridMismatchError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Integrator step too coarse.
class StabilityError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

/// Malformed input text. line/column are 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line = 0, int column = 0);
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

// Non-fatal diagnostics. Default handler prints to stderr.
using WarningHandler = std::function<void(const std::string&)>;
void set_warning_handler(WarningHandler h);
void warn(const std::string& msg);

} // namespace optocorr
