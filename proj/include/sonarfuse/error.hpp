#pragma once

#include <stdexcept>
#include <string>

namespace sonarfuse {

/// Violated precondition or invalid parameter (CLI exit code 1).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Filesystem or codec failure (CLI exit code 2).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw DomainError(message);
}

}  // namespace sonarfuse
