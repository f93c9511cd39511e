#pragma once

#include <stdexcept>
#include <string>

namespace embkit {

/// Base class for everything thrown by the toolkit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad configuration or misuse of an interface (CLI exit code 2).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Caller violated a documented precondition (dimension mismatch etc.).
class UsageError : public ConfigError {
public:
    explicit UsageError(const std::string& msg) : ConfigError(msg) {}
};

/// Problems with input data (CLI exit code 3).
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

/// Malformed file contents; message carries a line number or byte offset.
class FormatError : public DataError {
public:
    explicit FormatError(const std::string& msg) : DataError(msg) {}
};

/// A token / id the caller asked for does not exist.
class NotFoundError : public DataError {
public:
    explicit NotFoundError(const std::string& msg) : DataError(msg) {}
};

/// Input is structurally valid but mathematically unusable
/// (zero-norm vector, all-zero matrix, zero purchase count, ...).
class DegenerateInputError : public DataError {
public:
    explicit DegenerateInputError(const std::string& msg) : DataError(msg) {}
};

/// Cross-record inconsistency (e.g. one session spanning two users).
class IntegrityError : public DataError {
public:
    explicit IntegrityError(const std::string& msg) : DataError(msg) {}
};

} // namespace embkit
