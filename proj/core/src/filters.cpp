#include "purgelab/filters.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "purgelab/error.hpp"
#include "purgelab/io.hpp"
#include "purgelab/parallel.hpp"
#include "purgelab/random.hpp"
#include "text_util.hpp"

namespace purgelab {

FlagMode FlagMode::cross_validated(std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("cross-validated flagging needs at least 2 folds");
  return FlagMode{Kind::cross_validated, folds, seed};
}

FlagMode FlagMode::parse(std::string_view text, std::uint64_t seed) {
  text = detail::trim(text);
  if (text == "all" || text == "train-on-all") return train_on_all();
  if (text.substr(0, 3) == "cv:") {
    const auto digits = text.substr(3);
    std::size_t folds = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), folds);
    if (ec == std::errc() && ptr == digits.data() + digits.size()) return cross_validated(folds, seed);
  }
  throw std::invalid_argument("flag mode must be 'all' or 'cv:<folds>', got '" + std::string(text) + "'");
}

std::string FlagMode::to_string() const {
  return kind == Kind::train_on_all ? "all" : "cv:" + std::to_string(folds);
}

MisclassificationMatrix::MisclassificationMatrix(std::vector<std::string> learner_ids,
                                                 std::size_t instance_count,
                                                 std::vector<std::uint8_t> flags)
    : learner_ids_(std::move(learner_ids)), instance_count_(instance_count), flags_(std::move(flags)) {
  if (flags_.size() != learner_ids_.size() * instance_count_) {
    throw std::invalid_argument("misclassification matrix dimensions do not match");
  }
}

std::size_t MisclassificationMatrix::misclassified_count(std::size_t instance) const {
  std::size_t count = 0;
  for (std::size_t l = 0; l < learner_ids_.size(); ++l) count += flagged(l, instance) ? 1 : 0;
  return count;
}

MisclassificationMatrix MisclassificationMatrix::select_learners(std::span<const std::size_t> rows) const {
  std::vector<std::string> ids;
  std::vector<std::uint8_t> flags;
  flags.reserve(rows.size() * instance_count_);
  for (const auto r : rows) {
    ids.push_back(learner_ids_.at(r));
    const auto source = row(r);
    flags.insert(flags.end(), source.begin(), source.end());
  }
  return MisclassificationMatrix(std::move(ids), instance_count_, std::move(flags));
}

namespace {

std::vector<std::uint8_t> flag_row(const LearnerSpec& spec, const Dataset& dataset, const FlagMode& mode,
                                   const FoldPlan* plan) {
  std::vector<std::uint8_t> row(dataset.size(), 0);
  if (mode.kind == FlagMode::Kind::train_on_all) {
    const TrainedModel model = fit(spec, dataset);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      row[i] = model.predict(dataset.instance(i)) != dataset.instance(i).label ? 1 : 0;
    }
    return row;
  }
  for (std::size_t f = 0; f < plan->fold_count(); ++f) {
    const auto train = plan->train_indices(f);
    const auto test = plan->test_indices(f);
    const TrainedModel model = fit(spec, dataset.subset(train));
    for (const auto i : test) {
      row[i] = model.predict(dataset.instance(i)) != dataset.instance(i).label ? 1 : 0;
    }
  }
  return row;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

}  // namespace

MisclassificationMatrix flag_misclassified(std::span<const LearnerSpec> specs, const Dataset& dataset,
                                           const FlagMode& mode, std::size_t jobs) {
  if (specs.empty()) throw std::invalid_argument("flag_misclassified needs at least one learner");
  std::optional<FoldPlan> plan;
  if (mode.kind == FlagMode::Kind::cross_validated) {
    plan = stratified_folds(dataset, mode.folds, mode.seed);
  }
  std::vector<std::vector<std::uint8_t>> rows(specs.size());
  parallel_for(specs.size(), jobs, [&](std::size_t l) {
    rows[l] = flag_row(specs[l], dataset, mode, plan ? &*plan : nullptr);
  });
  std::vector<std::string> ids;
  std::vector<std::uint8_t> flags;
  flags.reserve(specs.size() * dataset.size());
  for (std::size_t l = 0; l < specs.size(); ++l) {
    ids.push_back(specs[l].to_string());
    flags.insert(flags.end(), rows[l].begin(), rows[l].end());
  }
  return MisclassificationMatrix(std::move(ids), dataset.size(), std::move(flags));
}

FilterOutcome ensemble_filter(const MisclassificationMatrix& matrix, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("ensemble threshold must lie in (0, 1]");
  }
  if (matrix.learner_count() == 0) throw std::invalid_argument("ensemble_filter: matrix has no learners");
  FilterOutcome outcome;
  const auto learners = static_cast<double>(matrix.learner_count());
  for (std::size_t i = 0; i < matrix.instance_count(); ++i) {
    const double fraction = static_cast<double>(matrix.misclassified_count(i)) / learners;
    (fraction >= threshold ? outcome.removed : outcome.kept).push_back(i);
  }
  outcome.config = "ensemble threshold=" + format_real(threshold) + " learners=" +
                   std::to_string(matrix.learner_count());
  return outcome;
}

FilterOutcome biased_filter(const LearnerSpec& spec, const Dataset& dataset, const FlagMode& mode) {
  const auto matrix = flag_misclassified(std::span(&spec, 1), dataset, mode);
  FilterOutcome outcome;
  for (std::size_t i = 0; i < matrix.instance_count(); ++i) {
    (matrix.flagged(0, i) ? outcome.removed : outcome.kept).push_back(i);
  }
  outcome.config = "biased learner=" + spec.to_string() + " flags=" + mode.to_string();
  return outcome;
}

FilteredData apply_filter(const Dataset& dataset, const FilterOutcome& outcome) {
  if (outcome.kept.size() + outcome.removed.size() != dataset.size()) {
    throw std::invalid_argument("filter outcome does not partition the dataset");
  }
  if (outcome.removed.empty()) return FilteredData{dataset, false};
  if (outcome.kept.size() < 2) return FilteredData{dataset, true};
  const auto before = dataset.class_counts();
  std::vector<std::size_t> after(dataset.class_count(), 0);
  for (const auto i : outcome.kept) ++after[dataset.instance(i).label];
  for (std::size_t c = 0; c < before.size(); ++c) {
    if (before[c] > 0 && after[c] == 0) return FilteredData{dataset, true};
  }
  return FilteredData{dataset.subset(outcome.kept), false};
}

HoldoutSplit stratified_holdout(const Dataset& dataset, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("validation fraction must lie in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(dataset.class_count());
  for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset.instance(i).label].push_back(i);

  constexpr int kRetries = 10;
  for (int attempt = 0; attempt <= kRetries; ++attempt) {
    const std::uint64_t attempt_seed = seed + static_cast<std::uint64_t>(attempt);
    Rng rng(attempt_seed);
    HoldoutSplit split;
    split.seed = attempt_seed;
    bool degenerate = false;
    for (auto members : by_class) {
      rng.shuffle(std::span<std::size_t>(members));
      const double share = fraction * static_cast<double>(members.size());
      auto take = static_cast<std::size_t>(std::floor(share + rng.uniform01()));
      if (members.size() >= 2) {
        take = std::min(take, members.size() - 1);
        if (take == 0) degenerate = true;
      }
      take = std::min(take, members.size());
      split.validation.insert(split.validation.end(), members.begin(),
                              members.begin() + static_cast<std::ptrdiff_t>(take));
      split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(take),
                         members.end());
    }
    if (split.train.empty() || split.validation.empty()) degenerate = true;
    if (degenerate) continue;
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.validation.begin(), split.validation.end());
    return split;
  }
  throw DataError(DataErrorKind::degenerate,
                  "'" + dataset.name() + "': no usable validation split after " +
                      std::to_string(kRetries) + " re-draws");
}

namespace {

// Accuracy of the target trained on the split's training part after
// removing what the selected filter rows flag at the threshold.
double run_with_filter_set(const MisclassificationMatrix& candidate_flags,
                           const std::vector<std::size_t>& filter_set, const LearnerSpec& target,
                           const Dataset& train, const Dataset& validation, double threshold) {
  if (filter_set.empty()) return accuracy(fit(target, train), validation);
  const auto outcome = ensemble_filter(candidate_flags.select_learners(filter_set), threshold);
  const auto filtered = apply_filter(train, outcome);
  return accuracy(fit(target, filtered.data), validation);
}

}  // namespace

AdaptiveSearchTrace adaptive_filter(std::span<const LearnerSpec> candidates, const LearnerSpec& target,
                                    const Dataset& dataset, const AdaptiveOptions& options) {
  if (candidates.empty()) throw std::invalid_argument("adaptive_filter needs at least one candidate");
  if (!(options.threshold > 0.0 && options.threshold <= 1.0)) {
    throw std::invalid_argument("ensemble threshold must lie in (0, 1]");
  }
  const HoldoutSplit split = stratified_holdout(dataset, options.validation_fraction, options.seed);
  const Dataset train = dataset.subset(split.train);
  const Dataset validation = dataset.subset(split.validation);

  // Each learner's flags depend only on (learner, data, mode), so one matrix
  // over all candidates serves every filter set.
  const auto flags = flag_misclassified(candidates, train, options.mode, options.jobs);

  AdaptiveSearchTrace trace;
  trace.split_seed = split.seed;
  std::vector<std::size_t> remaining = all_indices(candidates.size());
  std::vector<std::size_t> filter_set;
  double current = run_with_filter_set(flags, filter_set, target, train, validation, options.threshold);
  trace.accuracies.push_back(current);

  while (!remaining.empty()) {
    double best = current;
    std::optional<std::size_t> best_pos;
    std::vector<double> scores(remaining.size());
    parallel_for(remaining.size(), options.jobs, [&](std::size_t k) {
      auto trial = filter_set;
      trial.push_back(remaining[k]);
      scores[k] = run_with_filter_set(flags, trial, target, train, validation, options.threshold);
    });
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      if (scores[k] > best) {
        best = scores[k];
        best_pos = k;
      }
    }
    if (!best_pos) break;
    const std::size_t accepted = remaining[*best_pos];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(*best_pos));
    filter_set.push_back(accepted);
    trace.chosen.push_back(accepted);
    trace.chosen_ids.push_back(candidates[accepted].to_string());
    trace.accuracies.push_back(best);
    current = best;
  }
  return trace;
}

FilterOutcome adaptive_outcome(const AdaptiveSearchTrace& trace, std::span<const LearnerSpec> candidates,
                               const Dataset& dataset, const AdaptiveOptions& options) {
  FilterOutcome outcome;
  if (trace.chosen.empty()) {
    outcome.kept = all_indices(dataset.size());
  } else {
    std::vector<LearnerSpec> chosen;
    for (const auto c : trace.chosen) chosen.push_back(candidates[c]);
    outcome = ensemble_filter(flag_misclassified(chosen, dataset, options.mode, options.jobs),
                              options.threshold);
  }
  outcome.config = "adaptive threshold=" + format_real(options.threshold) +
                   " filters=" + std::to_string(trace.chosen.size());
  return outcome;
}

ThresholdSelection select_best_threshold(const MisclassificationMatrix& matrix,
                                         std::span<const double> thresholds, const LearnerSpec& target,
                                         const Dataset& dataset, const CvProtocol& protocol) {
  if (thresholds.empty()) throw std::invalid_argument("select_best_threshold: empty threshold set");
  if (matrix.instance_count() != dataset.size()) {
    throw std::invalid_argument("select_best_threshold: matrix does not match dataset");
  }
  std::vector<double> ordered(thresholds.begin(), thresholds.end());
  std::sort(ordered.begin(), ordered.end(), std::greater<>());
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

  std::vector<FoldPlan> plans;
  for (std::size_t r = 0; r < protocol.repeats; ++r) {
    plans.push_back(stratified_folds(dataset, protocol.folds, protocol.repeat_seed(r)));
  }
  ThresholdSelection selection;
  bool first = true;
  for (const double t : ordered) {
    const auto outcome = ensemble_filter(matrix, t);
    std::vector<std::uint8_t> removed(dataset.size(), 0);
    for (const auto i : outcome.removed) removed[i] = 1;
    double total = 0.0;
    std::size_t cells = 0;
    for (const auto& plan : plans) {
      for (std::size_t f = 0; f < plan.fold_count(); ++f) {
        const auto train_idx = plan.train_indices(f);
        const Dataset train = dataset.subset(train_idx);
        FilterOutcome local;
        for (std::size_t k = 0; k < train_idx.size(); ++k) {
          (removed[train_idx[k]] ? local.removed : local.kept).push_back(k);
        }
        const auto filtered = apply_filter(train, local);
        const auto test_idx = plan.test_indices(f);
        total += accuracy(fit(target, filtered.data), dataset.subset(test_idx));
        ++cells;
      }
    }
    const double mean = total / static_cast<double>(cells);
    selection.evaluated.emplace_back(t, mean);
    if (first || mean > selection.accuracy) {
      selection.threshold = t;
      selection.accuracy = mean;
      first = false;
    }
  }
  return selection;
}

}  // namespace purgelab
