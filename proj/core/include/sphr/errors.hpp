#pragma once

#include <stdexcept>
#include <string>

namespace sphr {

/// Base class for all engine errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad arguments, malformed configuration, violated preconditions.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(what) {}
};

/// Numeric failure during computation (non-finite state, degenerate density).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(what) {}
};

/// Filesystem or serialization failure.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

} // namespace sphr
