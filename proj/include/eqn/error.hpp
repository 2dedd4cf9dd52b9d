#pragma once

#include <stdexcept>
#include <string>

namespace eqn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data: bad CSV rows, out-of-range labels, missing columns.
class DataError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration values or unknown configuration keys.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Training diverged or produced non-finite values.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace eqn
