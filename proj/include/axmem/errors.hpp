#pragma once

#include <stdexcept>
#include <string>

namespace axmem {

/// Violation of an operation's domain (bad level, misaligned address, ...).
class DomainError : public std::invalid_argument {
public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Invalid scenario or table file; reported to the CLI user as exit code 2.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace axmem
