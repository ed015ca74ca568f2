// errors.hpp - exception types shared by every mazerlab module

#pragma once

#include <stdexcept>
#include <string>

namespace mazerlab {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition on an input value does not hold. `field()` names the
// offending parameter.
class InvalidParameter : public Error {
public:
    InvalidParameter(std::string field, const std::string& what)
        : Error("invalid parameter '" + field + "': " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// A wavenumber is exactly zero, so plane-wave matching is undefined.
class DegenerateThreshold : public Error {
public:
    using Error::Error;
};

// The requested evaluation is only trusted at zero detuning.
class OutOfValidity : public Error {
public:
    using Error::Error;
};

// Marker for failures that originate in floating point work rather than
// in the inputs. The CLI maps these to exit code 3.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

class NumericalDegeneracy : public NumericalFailure {
public:
    NumericalDegeneracy(const std::string& what, double condition_number)
        : NumericalFailure(what + " (condition number " + std::to_string(condition_number) + ")"),
          condition_number_(condition_number) {}

    double condition_number() const noexcept { return condition_number_; }

private:
    double condition_number_;
};

class StabilityError : public NumericalFailure {
public:
    using NumericalFailure::NumericalFailure;
};

}  // namespace mazerlab
