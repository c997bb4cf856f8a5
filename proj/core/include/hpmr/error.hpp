#pragma once

#include <stdexcept>
#include <string>

namespace hpmr {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OutOfBoundsError : public Error {
public:
    OutOfBoundsError(std::string parameter, double value, double lower, double upper);

    const std::string& parameter() const noexcept { return parameter_; }
    double value() const noexcept { return value_; }
    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }

private:
    std::string parameter_;
    double value_;
    double lower_;
    double upper_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace hpmr
