#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace purgelab {

/// Categories of data-level failures. Precondition violations on arguments
/// are reported with std::invalid_argument instead.
enum class DataErrorKind {
  unreadable_file,
  ragged_row,
  missing_label,
  unknown_column,
  malformed,
  undeclared_value,
  unsupported_feature,
  schema_mismatch,
  degenerate,
};

std::string_view to_string(DataErrorKind kind);

class DataError : public std::runtime_error {
 public:
  DataError(DataErrorKind kind, const std::string& message);

  DataErrorKind kind() const noexcept { return kind_; }

 private:
  DataErrorKind kind_;
};

/// A learner failed to fit or predict; carries the learner id (and the
/// dataset name when known) in the message.
class LearnerError : public std::runtime_error {
 public:
  LearnerError(std::string learner_id, const std::string& message);

  const std::string& learner_id() const noexcept { return learner_id_; }

 private:
  std::string learner_id_;
};

}  // namespace purgelab
