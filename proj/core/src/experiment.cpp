#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "purgelab/evalstats.hpp"
#include "purgelab/io.hpp"
#include "purgelab/parallel.hpp"
#include "purgelab/random.hpp"

namespace purgelab {

namespace {

class VotingModel : public Model {
 public:
  VotingModel(std::vector<TrainedModel> members, std::size_t classes)
      : members_(std::move(members)), classes_(classes) {}

  ClassDistribution distribution(const Instance& instance) const override {
    ClassDistribution votes(classes_, 0.0);
    for (const auto& m : members_) votes[m.predict(instance)] += 1.0;
    for (auto& v : votes) v /= static_cast<double>(members_.size());
    return votes;
  }

 private:
  std::vector<TrainedModel> members_;
  std::size_t classes_;
};

}  // namespace

TrainedModel voting_fit(std::span<const LearnerSpec> specs, const Dataset& train) {
  if (specs.empty()) throw std::invalid_argument("voting ensemble needs at least one member");
  std::vector<TrainedModel> members;
  members.reserve(specs.size());
  for (const auto& s : specs) members.push_back(fit(s, train));
  return TrainedModel(LearnerSpec{"voting", {}, 0},
                      std::make_shared<VotingModel>(std::move(members), train.class_count()), train);
}

std::string_view to_string(Condition condition) {
  switch (condition) {
    case Condition::none: return "none";
    case Condition::biased: return "biased";
    case Condition::ensemble: return "ensemble";
    case Condition::adaptive: return "adaptive";
    case Condition::voting: return "voting";
    case Condition::filtered_voting: return "filtered-voting";
  }
  return "?";
}

Condition parse_condition(std::string_view text) {
  for (const auto c : {Condition::none, Condition::biased, Condition::ensemble, Condition::adaptive,
                       Condition::voting, Condition::filtered_voting}) {
    if (text == to_string(c)) return c;
  }
  if (text == "fvoting") return Condition::filtered_voting;
  throw std::invalid_argument("unknown condition '" + std::string(text) + "'");
}

namespace {

bool per_learner(Condition c) { return c != Condition::voting && c != Condition::filtered_voting; }
bool uses_thresholds(Condition c) { return c == Condition::ensemble || c == Condition::filtered_voting; }
bool uses_ensemble(Condition c) { return c != Condition::none && c != Condition::biased; }

}  // namespace

void ExperimentPlan::validate() const {
  if (datasets.empty()) throw std::invalid_argument("experiment needs at least one dataset");
  if (conditions.empty()) throw std::invalid_argument("experiment needs at least one condition");
  if (repeats < 1) throw std::invalid_argument("repeats must be at least 1");
  if (folds < 2) throw std::invalid_argument("folds must be at least 2");
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    for (std::size_t j = i + 1; j < conditions.size(); ++j) {
      if (conditions[i] == conditions[j]) {
        throw std::invalid_argument("condition '" + std::string(to_string(conditions[i])) + "' listed twice");
      }
    }
  }
  const bool need_learners = std::any_of(conditions.begin(), conditions.end(), per_learner);
  const bool need_ensemble = std::any_of(conditions.begin(), conditions.end(), uses_ensemble);
  const bool need_thresholds = std::any_of(conditions.begin(), conditions.end(), uses_thresholds);
  if (need_learners && learners.empty()) throw std::invalid_argument("experiment needs at least one learner");
  if (need_ensemble && ensemble.empty()) throw std::invalid_argument("experiment needs a non-empty ensemble");
  if (need_thresholds && thresholds.empty()) throw std::invalid_argument("experiment needs at least one threshold");
  for (const double t : thresholds) {
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("ensemble threshold must lie in (0, 1]");
  }
  if (!(adaptive_threshold > 0.0 && adaptive_threshold <= 1.0)) {
    throw std::invalid_argument("adaptive threshold must lie in (0, 1]");
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation fraction must lie in (0, 1)");
  }
  for (const auto& s : learners) purgelab::validate(s);
  for (const auto& s : ensemble) purgelab::validate(s);
  for (const auto& d : datasets) {
    if (d.size() < folds) {
      throw std::invalid_argument("dataset '" + d.name() + "' has fewer instances than folds");
    }
  }
}

std::uint64_t fold_seed(std::uint64_t master, std::string_view dataset, std::size_t repeat) {
  return mix_seed({master, fnv1a64(dataset), repeat});
}

namespace {

struct FoldContext {
  const ExperimentPlan& plan;
  const Dataset& train;
  const Dataset& test;
  std::uint64_t base;  // (master, dataset, repeat, fold)

  LearnerSpec seeded(const LearnerSpec& spec) const {
    LearnerSpec s = spec;
    s.seed = mix_seed({base, spec.seed});
    return s;
  }
  std::vector<LearnerSpec> seeded(const std::vector<LearnerSpec>& specs) const {
    std::vector<LearnerSpec> out;
    for (const auto& s : specs) out.push_back(seeded(s));
    return out;
  }
  std::uint64_t condition_seed(Condition c) const {
    return mix_seed({base, static_cast<std::uint64_t>(c) + 1});
  }
  FlagMode with_seed(FlagMode mode, Condition c) const {
    mode.seed = condition_seed(c);
    return mode;
  }
};

std::string threshold_label(std::string_view prefix, double t) {
  return std::string(prefix) + "@" + format_real(t);
}

void score(Cell& cell, const TrainedModel& model, const Dataset& train, const Dataset& test) {
  cell.train_size = train.size();
  cell.accuracy = accuracy(model, test);
}

template <typename Fn>
void guarded(Cell& cell, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    cell.error = e.what();
    cell.accuracy = std::numeric_limits<double>::quiet_NaN();
  }
}

std::vector<Cell> run_fold(const FoldContext& ctx, const Cell& stamp) {
  const ExperimentPlan& plan = ctx.plan;
  std::vector<Cell> cells;
  auto make = [&](std::string learner, std::string condition) -> Cell& {
    Cell c = stamp;
    c.learner = std::move(learner);
    c.condition = std::move(condition);
    cells.push_back(std::move(c));
    return cells.back();
  };

  const auto ensemble = ctx.seeded(plan.ensemble);
  std::optional<MisclassificationMatrix> matrix;
  std::string matrix_error;
  auto shared_matrix = [&]() -> const MisclassificationMatrix& {
    if (!matrix && matrix_error.empty()) {
      try {
        matrix = flag_misclassified(ensemble, ctx.train, ctx.with_seed(plan.flag_mode, Condition::ensemble));
      } catch (const std::exception& e) {
        matrix_error = e.what();
      }
    }
    if (!matrix) throw std::runtime_error("ensemble flags: " + matrix_error);
    return *matrix;
  };

  for (const Condition condition : plan.conditions) {
    switch (condition) {
      case Condition::none:
        for (const auto& spec : plan.learners) {
          Cell& cell = make(spec.to_string(), "none");
          guarded(cell, [&] { score(cell, fit(ctx.seeded(spec), ctx.train), ctx.train, ctx.test); });
        }
        break;
      case Condition::biased:
        for (const auto& spec : plan.learners) {
          Cell& cell = make(spec.to_string(), "biased");
          guarded(cell, [&] {
            const auto target = ctx.seeded(spec);
            const auto outcome = biased_filter(target, ctx.train, ctx.with_seed(plan.flag_mode, condition));
            const auto filtered = apply_filter(ctx.train, outcome);
            cell.removed = filtered.fell_back ? 0 : outcome.removed.size();
            cell.fell_back = filtered.fell_back;
            score(cell, fit(target, filtered.data), filtered.data, ctx.test);
          });
        }
        break;
      case Condition::ensemble:
        for (const auto& spec : plan.learners) {
          for (const double t : plan.thresholds) {
            Cell& cell = make(spec.to_string(), threshold_label("ensemble", t));
            guarded(cell, [&] {
              const auto outcome = ensemble_filter(shared_matrix(), t);
              const auto filtered = apply_filter(ctx.train, outcome);
              cell.removed = filtered.fell_back ? 0 : outcome.removed.size();
              cell.fell_back = filtered.fell_back;
              score(cell, fit(ctx.seeded(spec), filtered.data), filtered.data, ctx.test);
            });
          }
        }
        break;
      case Condition::adaptive:
        for (const auto& spec : plan.learners) {
          Cell& cell = make(spec.to_string(), "adaptive");
          guarded(cell, [&] {
            AdaptiveOptions options;
            options.threshold = plan.adaptive_threshold;
            options.mode = ctx.with_seed(plan.adaptive_flag_mode, condition);
            options.validation_fraction = plan.validation_fraction;
            options.seed = ctx.condition_seed(condition);
            const auto target = ctx.seeded(spec);
            const auto trace = adaptive_filter(ensemble, target, ctx.train, options);
            const auto outcome = adaptive_outcome(trace, ensemble, ctx.train, options);
            const auto filtered = apply_filter(ctx.train, outcome);
            cell.removed = filtered.fell_back ? 0 : outcome.removed.size();
            cell.fell_back = filtered.fell_back;
            score(cell, fit(target, filtered.data), filtered.data, ctx.test);
          });
        }
        break;
      case Condition::voting: {
        Cell& cell = make("voting", "voting");
        guarded(cell, [&] { score(cell, voting_fit(ensemble, ctx.train), ctx.train, ctx.test); });
        break;
      }
      case Condition::filtered_voting:
        for (const double t : plan.thresholds) {
          Cell& cell = make("voting", threshold_label("fvoting", t));
          guarded(cell, [&] {
            const auto outcome = ensemble_filter(shared_matrix(), t);
            const auto filtered = apply_filter(ctx.train, outcome);
            cell.removed = filtered.fell_back ? 0 : outcome.removed.size();
            cell.fell_back = filtered.fell_back;
            score(cell, voting_fit(ensemble, filtered.data), filtered.data, ctx.test);
          });
        }
        break;
    }
  }
  return cells;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentPlan& plan) {
  plan.validate();
  struct Task {
    std::size_t dataset;
    std::size_t repeat;
    std::size_t fold;
  };
  std::vector<std::vector<FoldPlan>> plans(plan.datasets.size());
  std::vector<Task> tasks;
  for (std::size_t d = 0; d < plan.datasets.size(); ++d) {
    const Dataset& data = plan.datasets[d];
    for (std::size_t r = 0; r < plan.repeats; ++r) {
      plans[d].push_back(stratified_folds(data, plan.folds, fold_seed(plan.seed, data.name(), r)));
      for (std::size_t f = 0; f < plan.folds; ++f) tasks.push_back({d, r, f});
    }
  }

  std::vector<std::vector<Cell>> per_task(tasks.size());
  parallel_for(tasks.size(), plan.jobs, [&](std::size_t k) {
    const Task& task = tasks[k];
    const Dataset& data = plan.datasets[task.dataset];
    const FoldPlan& folds = plans[task.dataset][task.repeat];
    const Dataset train = data.subset(folds.train_indices(task.fold));
    const Dataset test = data.subset(folds.test_indices(task.fold));
    const FoldContext ctx{plan, train, test,
                          mix_seed({fold_seed(plan.seed, data.name(), task.repeat), task.fold})};
    Cell stamp;
    stamp.dataset = data.name();
    stamp.repeat = task.repeat;
    stamp.fold = task.fold;
    per_task[k] = run_fold(ctx, stamp);
  });

  ExperimentResult result;
  result.seed = plan.seed;
  for (auto& cells : per_task) {
    for (auto& c : cells) result.cells.push_back(std::move(c));
  }

  std::map<std::string, std::pair<std::size_t, std::size_t>> failures;  // condition -> (failed, total)
  std::vector<std::string> order;
  for (const auto& c : result.cells) {
    if (!failures.count(c.condition)) order.push_back(c.condition);
    auto& [failed, total] = failures[c.condition];
    ++total;
    if (c.failed()) ++failed;
    if (c.fell_back) {
      result.warnings.push_back(c.dataset + " repeat " + std::to_string(c.repeat) + " fold " +
                                std::to_string(c.fold) + " " + c.learner + " " + c.condition +
                                ": filter fell back to the unfiltered training set");
    }
  }
  for (const auto& name : order) {
    const auto [failed, total] = failures[name];
    if (failed == total) result.warnings.push_back("condition " + name + " failed in every cell");
  }
  return result;
}

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (const char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string results_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "schema,dataset,repeat,fold,learner,condition,accuracy,train_size,removed,fell_back,error\n";
  for (const auto& c : result.cells) {
    out << kResultsSchema << ',' << csv_field(c.dataset) << ',' << c.repeat << ',' << c.fold << ','
        << csv_field(c.learner) << ',' << csv_field(c.condition) << ','
        << (c.failed() ? std::string() : format_real(c.accuracy)) << ',' << c.train_size << ','
        << c.removed << ',' << (c.fell_back ? 1 : 0) << ',' << csv_field(c.error) << '\n';
  }
  return out.str();
}

}  // namespace purgelab
