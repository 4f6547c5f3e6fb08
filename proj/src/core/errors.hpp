#pragma once

#include <stdexcept>
#include <string>

namespace stm {

struct InvalidArgument : std::runtime_error {
  explicit InvalidArgument(const std::string& msg) : std::runtime_error(msg) {}
};

// A search (flower, chain enumeration) exceeded its node budget.
// Never silently truncated: callers must treat the result as absent.
struct BudgetExhausted : std::runtime_error {
  explicit BudgetExhausted(const std::string& msg) : std::runtime_error(msg) {}
};

// A finite-domain computation cannot certify its answer (e.g. a matching
// flower wraps more than half the torus during rigidity recovery).
struct Inconclusive : std::runtime_error {
  explicit Inconclusive(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace stm
