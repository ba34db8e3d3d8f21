#include "navkit/error.hpp"

namespace navkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InsufficientData: return "insufficient-data";
    case ErrorCode::DegenerateConfiguration: return "degenerate-configuration";
    case ErrorCode::DegenerateMatrix: return "degenerate-matrix";
    case ErrorCode::NoValidPose: return "no-valid-pose";
    case ErrorCode::InsufficientRotationalDiversity: return "insufficient-rotational-diversity";
    case ErrorCode::UnregisteredMarker: return "unregistered-marker";
    case ErrorCode::OutOfOrder: return "out-of-order";
    case ErrorCode::NotVisible: return "not-visible";
    case ErrorCode::CountMismatch: return "count-mismatch";
    case ErrorCode::MarkerMismatch: return "marker-mismatch";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::SchemaError: return "schema-error";
    case ErrorCode::UniquenessError: return "uniqueness-error";
    case ErrorCode::ReferenceError: return "reference-error";
    case ErrorCode::UnknownFrame: return "unknown-frame";
    case ErrorCode::NoPath: return "no-path";
    case ErrorCode::CycleError: return "cycle-error";
    case ErrorCode::UnknownMetric: return "unknown-metric";
    case ErrorCode::IoError: return "io-error";
  }
  return "unknown-error";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::SchemaError:
    case ErrorCode::UniquenessError:
    case ErrorCode::ReferenceError:
    case ErrorCode::UnregisteredMarker:
    case ErrorCode::OutOfOrder:
    case ErrorCode::UnknownFrame:
    case ErrorCode::UnknownMetric:
    case ErrorCode::IoError:
    case ErrorCode::CountMismatch:
    case ErrorCode::MarkerMismatch:
    case ErrorCode::InvalidArgument:
      return true;
    default:
      return false;
  }
}

}  // namespace navkit
