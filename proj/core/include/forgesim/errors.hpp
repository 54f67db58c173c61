#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace forgesim {

// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// A computation over an agent's records needs at least one record.
class InsufficientDataError : public Error {
public:
    explicit InsufficientDataError(const std::string& message) : Error(message) {}
};

// A target id was not present in the popularity index it was built against.
class IndexMismatchError : public Error {
public:
    explicit IndexMismatchError(const std::string& message) : Error(message) {}
};

class EmptyToolboxError : public Error {
public:
    explicit EmptyToolboxError(const std::string& message) : Error(message) {}
};

class EmptySetError : public Error {
public:
    explicit EmptySetError(const std::string& message) : Error(message) {}
};

class OutOfRangeError : public Error {
public:
    explicit OutOfRangeError(const std::string& message) : Error(message) {}
};

class InvalidParamsError : public Error {
public:
    explicit InvalidParamsError(const std::string& message) : Error(message) {}
};

class StorageError : public Error {
public:
    explicit StorageError(const std::string& message) : Error(message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error(message) {}
};

// Malformed config file or inter-stage artifact.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error(message) {}
};

class CorruptCheckpointError : public Error {
public:
    explicit CorruptCheckpointError(const std::string& message) : Error(message) {}
};

// Generation loop hit its attempt cap before reaching the target count.
class IterationCapError : public Error {
public:
    IterationCapError(const std::string& message, std::uint64_t attempts, std::uint64_t accepted)
        : Error(message), attempts(attempts), accepted(accepted) {}
    std::uint64_t attempts;
    std::uint64_t accepted;
};

// Backend call failures, each distinct and carrying the attempt count.
enum class BackendErrorKind {
    Timeout,        // request did not complete within timeout_ms
    Transport,      // connection failure or non-200 status
    Protocol,       // response arrived but did not match the declared schema
    Exhausted,      // retry budget spent on transient failures
};

class BackendError : public Error {
public:
    BackendError(BackendErrorKind kind, const std::string& message, std::uint32_t attempts = 1)
        : Error(message), kind(kind), attempts(attempts) {}
    BackendErrorKind kind;
    std::uint32_t attempts;
};

inline const char* to_string(BackendErrorKind kind) {
    switch (kind) {
        case BackendErrorKind::Timeout: return "Timeout";
        case BackendErrorKind::Transport: return "TransportError";
        case BackendErrorKind::Protocol: return "ProtocolError";
        case BackendErrorKind::Exhausted: return "Exhausted";
    }
    return "?";
}

}  // namespace forgesim
