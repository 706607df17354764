#pragma once

#include <stdexcept>
#include <string>

namespace qdual {

/// Raised when an operation would exceed a configured resource budget;
/// the CLI maps it to its own exit code.
class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qdual
