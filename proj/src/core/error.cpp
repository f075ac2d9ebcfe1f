#include "secgate/core/error.hpp"

namespace secgate {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::BackendUnavailable: return "backend_unavailable";
    case ErrorCode::BackendAuth: return "backend_auth";
    case ErrorCode::BackendUpstream: return "backend_upstream";
    case ErrorCode::MalformedReply: return "malformed_reply";
    case ErrorCode::DuplicateDimension: return "duplicate_dimension";
    case ErrorCode::MissingDimension: return "missing_dimension";
    case ErrorCode::EmptyCorpus: return "empty_corpus";
    case ErrorCode::DuplicateForm: return "duplicate_form";
    case ErrorCode::EmptyForm: return "empty_form";
    case ErrorCode::ShrinkNotSupported: return "shrink_not_supported";
    case ErrorCode::NonFiniteLoss: return "non_finite_loss";
    case ErrorCode::Io: return "io";
    case ErrorCode::Malformed: return "malformed";
    case ErrorCode::DuplicateId: return "duplicate_id";
    case ErrorCode::CorpusTooSmall: return "corpus_too_small";
    case ErrorCode::AlreadyAnswered: return "already_answered";
    case ErrorCode::OutOfRange: return "out_of_range";
    case ErrorCode::StrategyMismatch: return "strategy_mismatch";
    case ErrorCode::PlaceholderCount: return "placeholder_count";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::Corrupt: return "corrupt";
    case ErrorCode::ConfigInvalid: return "config_invalid";
    case ErrorCode::BindFailure: return "bind_failure";
    case ErrorCode::Rejected: return "rejected";
  }
  return "unknown";
}

}  // namespace secgate
