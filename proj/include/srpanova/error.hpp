#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace srp {

/// Malformed or inconsistent input (CLI exit code 1).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Graph fails a RegionGraph invariant (CLI exit code 2).
class GraphError : public std::runtime_error {
 public:
  GraphError(const std::string& what, std::vector<std::string> regions = {})
      : std::runtime_error(what), regions_(std::move(regions)) {}

  const std::vector<std::string>& regions() const noexcept { return regions_; }

 private:
  std::vector<std::string> regions_;
};

/// Numerical failure inside a fit (bad initialization, singular structure).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace srp
