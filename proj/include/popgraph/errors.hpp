#pragma once

#include <stdexcept>
#include <string>

namespace popgraph {

// Base for everything thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor/operator shape disagreement.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Bad configuration or argument values (CLI exit code 1).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed or unreadable input files (CLI exit code 2).
class DataError : public Error {
public:
    using Error::Error;
};

// Non-finite values where finite ones are required (CLI exit code 3).
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace popgraph
