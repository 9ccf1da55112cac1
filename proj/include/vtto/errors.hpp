#pragma once

#include <stdexcept>
#include <string>

namespace vtto {

/// Invalid or inconsistent run configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numeric parameter outside the domain of the map it is passed to.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Point or segment outside the grid domain.
class GeometryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Solver breakdown, non-convergence or bracket failure (CLI exit code 2).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Singular state problem, e.g. missing supports.
class StructuralError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Caller passed data that does not belong together (stale solutions, caches).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace vtto
