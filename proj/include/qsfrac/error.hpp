#pragma once

#include <stdexcept>
#include <string>

namespace qsfrac {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs that violate a model or mesh invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent run configuration; carries the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Nonconvergence, singular systems, floating components.
class SolverError : public Error {
 public:
  using Error::Error;
};

// An exhaustive search or audit was asked to exceed its configured size limit.
class LimitError : public Error {
 public:
  using Error::Error;
};

}  // namespace qsfrac
