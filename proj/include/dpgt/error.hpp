#pragma once

#include <stdexcept>
#include <string>

namespace dpgt {

enum class ErrorCode {
  // history-miner
  RepositoryNotFound,
  RepositoryUnreadable,
  EmptyHistory,
  // defect-predictor
  TimestampOutOfRange,
  EmptyProject,
  // budget-allocator
  EmptyInput,
  RankOutOfRange,
  BudgetInfeasible,
  DegenerateTier,
  // evaluation-stats
  IndexOutOfRange,
  ShapeMismatch,
  EmptySample,
  // simulation-harness
  InfeasibleScenario,
  PlanMismatch,
  // configuration and file inputs
  InvalidConfig,
  InvalidInput,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when the discretionary budget T - N*t_min - T_DP is negative.
/// shortfall() is the positive number of seconds missing.
class BudgetInfeasibleError : public Error {
 public:
  BudgetInfeasibleError(double shortfall, const std::string& what)
      : Error(ErrorCode::BudgetInfeasible, what), shortfall_(shortfall) {}

  double shortfall() const noexcept { return shortfall_; }

 private:
  double shortfall_;
};

}  // namespace dpgt
