#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqdec {

// Bad user-supplied configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A caller violated an operation precondition (CLI exit code 4).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// Queried source is not covered by an explicit model.
class UnknownSourceError : public std::runtime_error {
 public:
  explicit UnknownSourceError(const std::string& what)
      : std::runtime_error(what) {}
};

// Search or enumeration exceeded its node budget (CLI exit code 3).
// Carries whatever the caller managed to compute so far, if anything.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, std::vector<int32_t> best_so_far,
              double best_log_prob)
      : std::runtime_error(what),
        best_so_far(std::move(best_so_far)),
        best_log_prob(best_log_prob),
        has_best(true) {}
  explicit BudgetError(const std::string& what)
      : std::runtime_error(what), best_log_prob(0.0), has_best(false) {}

  std::vector<int32_t> best_so_far;
  double best_log_prob;
  bool has_best;
};

// An internal consistency check failed (CLI exit code 4).
class InvariantError : public std::logic_error {
 public:
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace seqdec
