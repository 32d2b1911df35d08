#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dk {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violations on arguments (bad grid sizes, out-of-range
// parameters, negative boundary data, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed or unknown configuration entries. Carries the dotted key path.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// A step or solve produced non-finite values or failed to converge.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::size_t step_index = 0)
      : Error(what), step_index_(step_index) {}
  std::size_t step_index() const noexcept { return step_index_; }

 private:
  std::size_t step_index_;
};

}  // namespace dk
