#include "ezlab/error.hpp"

namespace ezlab {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::contains_origin: return "contains-origin";
    case ErrorCode::non_finite: return "non-finite";
    case ErrorCode::non_monotone_weight: return "non-monotone-weight";
    case ErrorCode::zero_real_part: return "zero-real-part";
    case ErrorCode::overlap: return "overlap";
    case ErrorCode::empty_cluster: return "empty-cluster";
    case ErrorCode::coverage: return "coverage";
    case ErrorCode::non_converged: return "non-converged";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
    case ErrorCode::config: return "config";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

}  // namespace ezlab
