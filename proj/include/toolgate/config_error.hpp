#pragma once

#include <stdexcept>
#include <string>

namespace toolgate {

// Invalid injector, matrix, or runner configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message, int line = 0)
      : std::runtime_error(line > 0 ? message + " (line " + std::to_string(line) + ")" : message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace toolgate
