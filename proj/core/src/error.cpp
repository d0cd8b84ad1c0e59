#include "purgelab/error.hpp"

namespace purgelab {

std::string_view to_string(DataErrorKind kind) {
  switch (kind) {
    case DataErrorKind::unreadable_file: return "unreadable file";
    case DataErrorKind::ragged_row: return "ragged row";
    case DataErrorKind::missing_label: return "missing label";
    case DataErrorKind::unknown_column: return "unknown column";
    case DataErrorKind::malformed: return "malformed input";
    case DataErrorKind::undeclared_value: return "undeclared nominal value";
    case DataErrorKind::unsupported_feature: return "unsupported ARFF feature";
    case DataErrorKind::schema_mismatch: return "schema mismatch";
    case DataErrorKind::degenerate: return "degenerate data";
  }
  return "data error";
}

DataError::DataError(DataErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

LearnerError::LearnerError(std::string learner_id, const std::string& message)
    : std::runtime_error("learner '" + learner_id + "': " + message),
      learner_id_(std::move(learner_id)) {}

}  // namespace purgelab
