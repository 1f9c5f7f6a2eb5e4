#pragma once

#include <stdexcept>
#include <string>

namespace dynheat {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation (non-finite values,
/// zero fields where a ratio is taken, inadmissible exponents).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure did not reach its tolerance.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double achieved)
        : Error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// Objects built on different meshes / exponents were combined.
class MismatchError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Time stepper or optimizer failure, with free-form diagnostics.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::string diagnostics = {})
        : Error(what), diagnostics_(std::move(diagnostics)) {}
    const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
    std::string diagnostics_;
};

/// An experiment ran to completion but one of its checks failed.
class ExperimentFailure : public Error {
public:
    using Error::Error;
};

}  // namespace dynheat
