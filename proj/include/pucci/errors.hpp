#pragma once

#include <stdexcept>
#include <string>

namespace pucci {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition or domain restriction was violated by the caller.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure produced a non-finite value or failed to converge.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace pucci
