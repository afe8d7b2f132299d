// ndrstats
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ndr {

// Violation of a documented argument precondition.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A series, continued fraction, or refinement loop exhausted its budget
// before reaching tolerance. residual() is the best relative residual seen.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, long steps)
      : std::runtime_error(what), residual_(residual), steps_(steps) {}
  double residual() const noexcept { return residual_; }
  long steps() const noexcept { return steps_; }

 private:
  double residual_;
  long steps_;
};

}  // namespace ndr
