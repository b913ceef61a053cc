#include "moran/error.hpp"

namespace moran {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::ContractionViolated: return "ContractionViolated";
    case ErrorCode::NonsingularityViolated: return "NonsingularityViolated";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidDigit: return "InvalidDigit";
    case ErrorCode::UnresolvedTranslation: return "UnresolvedTranslation";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::DegenerateScales: return "DegenerateScales";
    case ErrorCode::NotApplicable: return "NotApplicable";
  }
  return "Unknown";
}

}  // namespace moran
