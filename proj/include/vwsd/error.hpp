#pragma once

#include <stdexcept>
#include <string>

namespace vwsd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a schema or domain invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Bad CLI flags or config values.
class UsageError : public Error {
public:
  using Error::Error;
};

/// The LLM endpoint could not produce a completion.
class GatewayError : public Error {
public:
  using Error::Error;
};

class AuthError : public GatewayError {
public:
  using GatewayError::GatewayError;
};

/// Offline mode asked for a response that is not in the cache.
class ReplayGapError : public GatewayError {
public:
  explicit ReplayGapError(std::string key)
      : GatewayError("offline replay gap: no cached response for key " + key),
        key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

}  // namespace vwsd
