#pragma once

#include <stdexcept>
#include <string>

namespace sudx {

/// Base for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input files, broken invariants, bad configuration.
struct ValidationError : Error {
    using Error::Error;
};

/// Generation backend errors. request_id identifies the failing request.
struct BackendError : Error {
    BackendError(std::string msg, std::string request_id, int attempts = 1)
        : Error(std::move(msg)), request_id(std::move(request_id)), attempts(attempts) {}
    std::string request_id;
    int attempts;
};

/// Could not reach the endpoint. Retried before being raised.
struct TransportError : BackendError {
    using BackendError::BackendError;
};

/// Endpoint responded with a non-2xx status or an unparseable payload.
struct ProtocolError : BackendError {
    using BackendError::BackendError;
};

/// Request exceeded the configured deadline.
struct TimeoutError : BackendError {
    using BackendError::BackendError;
};

}  // namespace sudx
