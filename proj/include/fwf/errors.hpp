#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fwf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mismatched lengths, orders or too-short inputs.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid hyperparameter or count (K > N, empty grid, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Lag outside the range covered by a profile.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Paired series that are not aligned sample-for-sample.
class AlignmentError : public Error {
public:
    using Error::Error;
};

/// Series with zero variance where a spread is required.
class DegenerateSeriesError : public Error {
public:
    using Error::Error;
};

class IntegrationDivergenceError : public Error {
public:
    IntegrationDivergenceError(std::size_t step, const std::string& what)
        : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Symmetric system that failed positive-definite factorization.
class ConditioningError : public Error {
public:
    ConditioningError(double smallest_pivot, const std::string& what)
        : Error(what), smallest_pivot_(smallest_pivot) {}
    double smallest_pivot() const noexcept { return smallest_pivot_; }

private:
    double smallest_pivot_;
};

/// Malformed or invalid configuration / input file content.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// I/O failure (missing file, unwritable path, bad CSV).
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace fwf
