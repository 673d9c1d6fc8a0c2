#pragma once

#include <any>
#include <stdexcept>
#include <string>
#include <utility>

namespace tvfr {

// Base for all library errors. `kind()` is a stable short tag used in CLI diagnostics.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept = 0;
};

class InvalidInput : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "invalid-input"; }
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "not-positive-definite"; }
};

// Raised by iterative routines that hit their iteration cap. Carries the last iterate so
// callers can still inspect or write out a partial answer.
class ConvergenceFailure : public Error {
public:
    template <class Point>
    ConvergenceFailure(const std::string& what, Point last)
        : Error(what), last_(std::move(last)) {}

    const char* kind() const noexcept override { return "convergence-failure"; }

    template <class Point>
    const Point* last_iterate() const noexcept {
        return std::any_cast<Point>(&last_);
    }

private:
    std::any last_;
};

}  // namespace tvfr
