#pragma once

#include <stdexcept>
#include <string>

namespace levyclock {

/// Invalid numeric argument (non-finite, out of range, wrong sign).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mathematically ill-defined request: divergent moment, non-normalizable density.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Valid mathematics that this library does not implement (e.g. infinite-variation CGMY).
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Bad or unknown configuration field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A theorem hypothesis (Feller, A1, moment finiteness) is violated.
class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Broken internal invariant; indicates a bug rather than bad input.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

}  // namespace detail

}  // namespace levyclock
