#pragma once

#include <stdexcept>
#include <string>

namespace subexp {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Operand lives on a different state space (or has the wrong length).
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Row-interval bounds admit no zero-sum rate row.
class InfeasibleIntervals : public Error {
public:
    using Error::Error;
};

/// An Euler factor I + dQ would not be an upper transition operator.
class StepTooLarge : public Error {
public:
    using Error::Error;
};

/// A gamble or family claimed to be monotone is not.
class NotMonotone : public Error {
public:
    using Error::Error;
};

class GridMismatch : public Error {
public:
    using Error::Error;
};

} // namespace subexp
