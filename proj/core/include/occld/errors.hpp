#pragma once

#include <stdexcept>
#include <string>

namespace occld {

// Malformed or inconsistent input (bad model file, invariant violation, ...).
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A computation route was requested on a model it does not apply to
// (e.g. the spectral formula on a non-reversible model).
class RouteError : public std::runtime_error {
public:
  explicit RouteError(const std::string& what) : std::runtime_error(what) {}
};

// An estimation method was requested for an event class it cannot handle
// (e.g. exact auditing of a multi-function neighborhood).
class MethodMismatchError : public std::runtime_error {
public:
  explicit MethodMismatchError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace occld
