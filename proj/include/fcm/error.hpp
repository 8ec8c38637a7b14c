#pragma once

#include <stdexcept>
#include <string>

namespace fcm {

/// Base of every error raised by the library. The CLI maps each subclass to
/// a distinct process exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration, flags or preconditions (exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or missing input data (exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

/// Shape mismatch or other misuse of a numerical primitive.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// NaN/Inf produced or consumed, or training divergence (exit code 4).
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace fcm
