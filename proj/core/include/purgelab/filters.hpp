#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "purgelab/dataset.hpp"
#include "purgelab/learner.hpp"

namespace purgelab {

/// How misclassification flags are produced: resubstitution on the whole
/// set, or out-of-fold predictions from stratified v-fold CV.
struct FlagMode {
  enum class Kind { train_on_all, cross_validated };

  Kind kind = Kind::train_on_all;
  std::size_t folds = 0;
  std::uint64_t seed = 0;

  static FlagMode train_on_all() { return {}; }
  static FlagMode cross_validated(std::size_t folds, std::uint64_t seed);

  /// "all" or "cv:<folds>".
  static FlagMode parse(std::string_view text, std::uint64_t seed = 0);
  std::string to_string() const;

  bool operator==(const FlagMode&) const = default;
};

/// Boolean grid, learners x instances; true = the learner misclassified
/// the instance.
class MisclassificationMatrix {
 public:
  MisclassificationMatrix(std::vector<std::string> learner_ids, std::size_t instance_count,
                          std::vector<std::uint8_t> flags);

  const std::vector<std::string>& learner_ids() const noexcept { return learner_ids_; }
  std::size_t learner_count() const noexcept { return learner_ids_.size(); }
  std::size_t instance_count() const noexcept { return instance_count_; }

  bool flagged(std::size_t learner, std::size_t instance) const {
    return flags_[learner * instance_count_ + instance] != 0;
  }
  std::span<const std::uint8_t> row(std::size_t learner) const {
    return {flags_.data() + learner * instance_count_, instance_count_};
  }

  /// Number of learners that misclassified the instance.
  std::size_t misclassified_count(std::size_t instance) const;

  /// Matrix restricted to the given learner rows.
  MisclassificationMatrix select_learners(std::span<const std::size_t> rows) const;

  bool operator==(const MisclassificationMatrix&) const = default;

 private:
  std::vector<std::string> learner_ids_;
  std::size_t instance_count_;
  std::vector<std::uint8_t> flags_;
};

/// Kept/removed partition of a dataset's indices, both sorted ascending.
struct FilterOutcome {
  std::vector<std::size_t> kept;
  std::vector<std::size_t> removed;
  std::string config;
};

/// Fits every spec under the flag mode; rows follow the spec order. Fits
/// run on up to `jobs` threads. Fit failures surface as LearnerError.
MisclassificationMatrix flag_misclassified(std::span<const LearnerSpec> specs, const Dataset& dataset,
                                           const FlagMode& mode, std::size_t jobs = 1);

/// Removes what the learner itself misclassifies.
FilterOutcome biased_filter(const LearnerSpec& spec, const Dataset& dataset, const FlagMode& mode);

/// Removes instance i iff misclassified_count(i) / learner_count >= threshold.
/// threshold must lie in (0, 1].
FilterOutcome ensemble_filter(const MisclassificationMatrix& matrix, double threshold);

struct FilteredData {
  Dataset data;
  bool fell_back = false;
};

/// The kept instances, unless filtering removed a whole class that was
/// present or left fewer than two instances; then the input is returned
/// unchanged with fell_back set.
FilteredData apply_filter(const Dataset& dataset, const FilterOutcome& outcome);

struct AdaptiveOptions {
  double threshold = 0.5;
  FlagMode mode = FlagMode::cross_validated(3, 0);
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

/// Result of the greedy filter-set search.
struct AdaptiveSearchTrace {
  /// Accepted candidates, as indices into the candidate list, in order.
  std::vector<std::size_t> chosen;
  std::vector<std::string> chosen_ids;
  /// accuracies[0] is the unfiltered baseline; one more entry per accepted
  /// candidate, strictly increasing.
  std::vector<double> accuracies;
  /// Seed of the holdout split actually used (after any re-draws).
  std::uint64_t split_seed = 0;
};

struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::uint64_t seed = 0;
};

/// Stratified holdout. Per class (shuffled with the seed) the validation
/// share is floor(fraction * count + u), u uniform in [0, 1), capped so a
/// class with two or more members keeps one for training. If a class with
/// two or more members lands nowhere in validation the split is redrawn
/// with seed + 1, at most 10 times, then DataError(degenerate).
HoldoutSplit stratified_holdout(const Dataset& dataset, double fraction, std::uint64_t seed);

/// Greedy forward selection of a filter set. The candidate set shrinks as
/// learners are accepted; each pass adds the candidate with the best
/// strictly improving validation accuracy (earliest wins ties) and the
/// search stops when none improves. Evaluating a set flags the training
/// split with that set, removes instances at the threshold, fits the target
/// on the rest and scores it on the validation split. The empty set removes
/// nothing.
AdaptiveSearchTrace adaptive_filter(std::span<const LearnerSpec> candidates, const LearnerSpec& target,
                                    const Dataset& dataset, const AdaptiveOptions& options);

/// Applies a searched filter set to the whole dataset.
FilterOutcome adaptive_outcome(const AdaptiveSearchTrace& trace, std::span<const LearnerSpec> candidates,
                               const Dataset& dataset, const AdaptiveOptions& options);

struct ThresholdSelection {
  double threshold = 0.0;
  double accuracy = 0.0;
  /// (threshold, mean accuracy) for every evaluated threshold.
  std::vector<std::pair<double, double>> evaluated;
};

/// Optimistic threshold choice: for each threshold, the matrix (computed on
/// the whole dataset) decides removals; the target is cross-validated with
/// removed instances dropped from training folds only. Returns the best
/// mean accuracy; ties go to the larger threshold.
ThresholdSelection select_best_threshold(const MisclassificationMatrix& matrix,
                                         std::span<const double> thresholds, const LearnerSpec& target,
                                         const Dataset& dataset, const CvProtocol& protocol);

inline constexpr double kDefaultThresholds[] = {0.5, 0.7, 0.9};

}  // namespace purgelab
