#pragma once

#include <stdexcept>
#include <string>

namespace torsec {

/// Base class for all torsec errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input: config files, CLI flags, malformed interchange files,
/// out-of-range parameters. CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Analysis-level failure: violated operation precondition, infeasible input,
/// or an internal consistency check that did not hold. CLI exit code 3.
class AnalysisError : public Error {
public:
    using Error::Error;
};

/// Resource cap exceeded (cell count, refinement blow-up). CLI exit code 3.
class ResourceError : public AnalysisError {
public:
    using AnalysisError::AnalysisError;
};

} // namespace torsec
