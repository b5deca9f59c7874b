#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace osdyn {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value lies outside the domain of an operation (nonpositive denominator,
/// mismatched periods, nonpositive trajectory sample, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class HalfSaturationMismatch : public Error {
public:
    using Error::Error;
};

class NonpositiveBeta : public Error {
public:
    using Error::Error;
};

/// The state reached the ungrazable reserve (v - rho <= eps_sing) while
/// herbivores are present. `time()` is the located crossing time.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class BlowupError : public Error {
public:
    BlowupError(const std::string& what, double time) : Error(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// A standing hypothesis (e.g. positive averages of a and b) does not hold.
class HypothesisError : public Error {
public:
    using Error::Error;
};

/// A checker's integrand is singular for this parameter set, so the verdict
/// is undefined rather than false.
class InapplicableError : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    NoConvergence(const std::string& what, std::vector<double> residuals)
        : Error(what), residuals_(std::move(residuals)) {}
    const std::vector<double>& residuals() const noexcept { return residuals_; }

private:
    std::vector<double> residuals_;
};

/// Invalid scenario configuration; the message names the offending key.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace osdyn
