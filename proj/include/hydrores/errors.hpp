#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hydrores {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument to an operation (out-of-range value, mismatched lengths).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Inconsistent configuration, e.g. a genotype whose gene count does not
/// match the feature layout, or an unstable solver setup.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// A wave field containing NaN or infinite heights.
class InvalidFieldError : public Error {
public:
    using Error::Error;
};

/// The time integration blew up. Carries the index of the offending step.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t step, const std::string& what)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

} // namespace hydrores
