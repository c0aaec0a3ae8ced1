#pragma once

#include <stdexcept>
#include <string>

namespace specmatch {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// File format / parsing problems (ENVI headers, masks, CSV).
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

// Bad key or out-of-range value in a run configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// Numerical failure: singular autocorrelation, training divergence.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(what) {}
};

// Caller violated a documented precondition.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(what) {}
};

}  // namespace specmatch
