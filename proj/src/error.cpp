#include "hwr/error.hpp"

namespace hwr {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::dimension: return "dimension error";
    case ErrorCode::parameter: return "parameter error";
    case ErrorCode::too_many_blocks: return "too-many-blocks error";
    case ErrorCode::empty_ink: return "empty-ink error";
    case ErrorCode::invalid_index: return "invalid-index error";
    case ErrorCode::zero_variance: return "zero-variance error";
    case ErrorCode::undefined_silhouette: return "undefined-silhouette error";
    case ErrorCode::coverage: return "coverage error";
    case ErrorCode::structure: return "structure error";
    case ErrorCode::label_range: return "label-range error";
    case ErrorCode::mismatch: return "mismatch error";
    case ErrorCode::class_too_small: return "class-too-small error";
    case ErrorCode::io: return "io error";
    case ErrorCode::format: return "format error";
    case ErrorCode::checksum: return "checksum error";
    case ErrorCode::unsupported_version: return "unsupported-version error";
  }
  return "error";
}

}  // namespace hwr
