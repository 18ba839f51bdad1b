#pragma once

#include <stdexcept>
#include <string>

namespace keyterrain {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed scenario text (schema violation).
class ParseError : public Error {
public:
    using Error::Error;
};

/// A scenario or argument breaks a model invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Request cannot be satisfied, e.g. more remediation zones than eligible towns.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: singular system, residual check, non-convergence.
class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace keyterrain
