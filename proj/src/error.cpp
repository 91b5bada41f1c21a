#include "dpgt/error.hpp"

namespace dpgt {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::RepositoryNotFound: return "RepositoryNotFound";
    case ErrorCode::RepositoryUnreadable: return "RepositoryUnreadable";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::TimestampOutOfRange: return "TimestampOutOfRange";
    case ErrorCode::EmptyProject: return "EmptyProject";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::RankOutOfRange: return "RankOutOfRange";
    case ErrorCode::BudgetInfeasible: return "BudgetInfeasible";
    case ErrorCode::DegenerateTier: return "DegenerateTier";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::InfeasibleScenario: return "InfeasibleScenario";
    case ErrorCode::PlanMismatch: return "PlanMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

}  // namespace dpgt
