#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

// Base of every error the library raises. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments: index out of range, incompatible jets, malformed config.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// A point outside the domain of a function or metric (|x| >= 1 for Funk,
// y = 0, non-positive square root argument).
class DomainError : public Error {
public:
    using Error::Error;
};

// Division by a jet with zero constant term, or a singular matrix of jets.
class SingularError : public Error {
public:
    using Error::Error;
};

// Inner jets of a composition do not sit on the outer expansion point.
class CompositionPointError : public Error {
public:
    using Error::Error;
};

// Not enough jet order left to take the requested derivatives.
class BudgetError : public Error {
public:
    BudgetError(const std::string& what, int needed)
        : Error(what), needed_order_(needed) {}
    int needed_order() const noexcept { return needed_order_; }

private:
    int needed_order_;
};

// Integration or consistency check failed its tolerance.
class AccuracyError : public Error {
public:
    using Error::Error;
};

} // namespace finsler
