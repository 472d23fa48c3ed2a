#pragma once

#include <stdexcept>
#include <string>

namespace survood {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input data or configuration. The CLI maps this to exit code 2.
class InputError : public Error {
public:
    using Error::Error;
};

// A computation produced a non-finite value.
class NumericError : public Error {
public:
    using Error::Error;
};

// A metric has no defined value for the given input (e.g. zero comparable pairs).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

}  // namespace survood
