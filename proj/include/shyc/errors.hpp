#pragma once

#include <stdexcept>
#include <string>

namespace shyc {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Argument outside the documented domain (non-unit vector, bad dimension, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error("domain error: " + what) {}
};

// Geometric construction undefined: parallel vectors, rank-deficient frames.
class DegeneracyError : public Error {
public:
    explicit DegeneracyError(const std::string& what) : Error("degenerate input: " + what) {}
};

// Points at (or numerically at) each other's cut-locus.
class CutLocusError : public Error {
public:
    explicit CutLocusError(const std::string& what) : Error("cut-locus: " + what) {}
};

// Geodesic long enough to carry a conjugate point (sphere, rho >= pi).
class ConjugatePointError : public Error {
public:
    explicit ConjugatePointError(const std::string& what) : Error("conjugate point: " + what) {}
};

// No rotation angle realizes the requested contraction rate.
class InfeasibleRateError : public Error {
public:
    explicit InfeasibleRateError(const std::string& what) : Error("rate infeasible: " + what) {}
};

// J J' + K K' = I violated.
class CouplingConstraintError : public Error {
public:
    explicit CouplingConstraintError(const std::string& what)
        : Error("coupling constraint violated: " + what) {}
};

// Malformed or inconsistent run configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config error: " + what) {}
};

class StepTooLargeError : public Error {
public:
    explicit StepTooLargeError(const std::string& what) : Error("step too large: " + what) {}
};

}  // namespace shyc
