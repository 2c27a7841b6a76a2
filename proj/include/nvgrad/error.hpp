#pragma once

#include <stdexcept>
#include <string>

namespace nvgrad {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition or domain violation (bad geometry, point below the surface, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver failed or data does not identify the model.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}
}  // namespace detail

}  // namespace nvgrad
