#pragma once

#include <stdexcept>
#include <string>

namespace hyst {

// Invalid user input: bad configuration, unreadable file, violated precondition.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A loss, gradient or prediction became NaN/Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hyst
