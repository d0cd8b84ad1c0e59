#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "purgelab/dataset.hpp"
#include "purgelab/filters.hpp"
#include "purgelab/learner.hpp"

namespace purgelab {

/// Equal-weight plurality vote of the members; ties to the lowest class.
TrainedModel voting_fit(std::span<const LearnerSpec> specs, const Dataset& train);

enum class Condition { none, biased, ensemble, adaptive, voting, filtered_voting };

std::string_view to_string(Condition condition);
Condition parse_condition(std::string_view text);

struct ExperimentPlan {
  std::vector<Dataset> datasets;
  /// Targets of the per-learner conditions.
  std::vector<LearnerSpec> learners;
  /// Filter set of the ensemble and adaptive conditions, and the members of
  /// the voting conditions.
  std::vector<LearnerSpec> ensemble = builtin_learners();
  std::vector<Condition> conditions{Condition::none};
  std::vector<double> thresholds{0.5, 0.7, 0.9};
  FlagMode flag_mode = FlagMode::train_on_all();
  FlagMode adaptive_flag_mode = FlagMode::cross_validated(3, 0);
  double adaptive_threshold = 0.5;
  double validation_fraction = 0.2;
  std::size_t repeats = 5;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  /// Throws std::invalid_argument on an unusable plan.
  void validate() const;
};

/// One (dataset, repeat, fold, learner, condition) accuracy. Conditions
/// with thresholds are labelled "ensemble@0.7", "fvoting@0.7"; the voting
/// conditions use the learner name "voting".
struct Cell {
  std::string dataset;
  std::size_t repeat = 0;
  std::size_t fold = 0;
  std::string learner;
  std::string condition;
  double accuracy = 0.0;
  std::size_t train_size = 0;
  std::size_t removed = 0;
  bool fell_back = false;
  std::string error;

  bool failed() const { return !error.empty(); }
};

struct ExperimentResult {
  std::uint64_t seed = 0;
  std::vector<Cell> cells;
  std::vector<std::string> warnings;
};

/// Fold plan seed of a dataset and repeat.
std::uint64_t fold_seed(std::uint64_t master, std::string_view dataset, std::size_t repeat);

/// Filters only ever see the training part of a fold. The cell order and
/// every value are independent of plan.jobs.
ExperimentResult run_experiment(const ExperimentPlan& plan);

inline constexpr std::string_view kResultsSchema = "purgelab.results/1";
inline constexpr std::string_view kSummarySchema = "purgelab.summary/1";

std::string results_csv(const ExperimentResult& result);

struct WilcoxonResult {
  std::size_t n_effective = 0;
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_two_sided = 1.0;
  enum class Method { exact, normal_approximation } method = Method::exact;
};

/// Paired two-sided test on a - b. Zero differences keep their ranks,
/// split evenly between the sums, one dropped when their count is odd.
/// Exact when n_effective <= 25.
WilcoxonResult wilcoxon_signed_ranks(std::span<const double> a, std::span<const double> b);

struct SummaryRow {
  std::string learner;
  std::vector<std::string> datasets;
  std::vector<double> baseline_means;
  std::vector<double> comparison_means;
  double baseline_mean = 0.0;
  double comparison_mean = 0.0;
  /// Datasets where comparison is greater / equal (within 1e-9) / less.
  std::size_t greater = 0;
  std::size_t equal = 0;
  std::size_t less = 0;
  WilcoxonResult wilcoxon;
};

struct SummaryTable {
  std::string baseline;
  std::string comparison;
  std::vector<SummaryRow> rows;
};

/// Per learner with both conditions: per-dataset means over repeats and
/// folds (failed cells skipped), their average, counts and a Wilcoxon test.
/// A condition "<prefix>@max" takes, per dataset, the best of the
/// "<prefix>@<t>" conditions.
SummaryTable summarize(const ExperimentResult& result, std::string_view baseline,
                       std::string_view comparison);

std::string format_table(const SummaryTable& table);

/// Versioned JSON with per-(learner, condition) means, the requested
/// comparisons and failed cells.
std::string summary_json(const ExperimentResult& result, std::span<const SummaryTable> tables);

}  // namespace purgelab
