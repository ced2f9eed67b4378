#pragma once

#include <stdexcept>
#include <string>

namespace nsp {

/// Invalid argument to a numerical operation (digit out of range, shape mismatch).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid construction or run parameters.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what, std::string field = {})
      : std::invalid_argument(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// An exhaustive computation was refused because it exceeds its size cap.
class SizeCapError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Malformed dataset or model file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Broken internal invariant.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace nsp
