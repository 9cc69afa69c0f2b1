#pragma once

#include <stdexcept>
#include <string>

namespace ksopt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two fields (or a field and a mask/control) live on different grids.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// A documented precondition does not hold (bad argument values, negative
/// initial data, ...).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A linear or fixed-point solve did not reach its tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual, int time_index = -1)
        : Error(what), residual_(residual), time_index_(time_index) {}

    double residual() const noexcept { return residual_; }
    /// Time level at which the failure occurred, or -1 when not applicable.
    int time_index() const noexcept { return time_index_; }

private:
    double residual_;
    int time_index_;
};

} // namespace ksopt
