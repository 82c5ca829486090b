#pragma once

#include <stdexcept>
#include <string>

namespace nopde {

/// Bad user-supplied configuration (unknown key, missing value, bad range).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File-system or format failures.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct BadMagicError : IoError {
    explicit BadMagicError(const std::string& msg) : IoError(msg) {}
};

struct TruncatedFileError : IoError {
    explicit TruncatedFileError(const std::string& msg) : IoError(msg) {}
};

struct VersionMismatchError : IoError {
    explicit VersionMismatchError(const std::string& msg) : IoError(msg) {}
};

/// Numerical failures that are not encoded as a status value.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SingularJacobianError : NumericalError {
    explicit SingularJacobianError(const std::string& msg) : NumericalError(msg) {}
};

} // namespace nopde
