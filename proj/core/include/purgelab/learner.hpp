#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "purgelab/dataset.hpp"

namespace purgelab {

/// A learner id plus its hyperparameters, e.g. "knn:k=5" or
/// "decision-tree:pruning=none:min_leaf=2". The reserved key "seed" sets
/// the seed field instead of a hyperparameter.
struct LearnerSpec {
  std::string id;
  std::map<std::string, std::string> hyperparameters;
  std::uint64_t seed = 0;

  static LearnerSpec parse(std::string_view text, std::uint64_t default_seed = 0);

  /// Canonical "id[:key=value...]" with keys sorted; the seed is omitted.
  std::string to_string() const;

  bool operator==(const LearnerSpec&) const = default;
};

/// Comma-separated specs, or "all" for the built-in set.
std::vector<LearnerSpec> parse_learner_list(std::string_view text, std::uint64_t seed = 0);

/// The five built-ins with default hyperparameters, in a fixed order:
/// decision-tree, knn, naive-bayes, mlp, one-rule.
std::vector<LearnerSpec> builtin_learners(std::uint64_t seed = 0);

/// Per-class probabilities summing to one.
using ClassDistribution = std::vector<double>;

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax_lowest(std::span<const double> values);

/// Opaque fitted state of a learner.
class Model {
 public:
  virtual ~Model() = default;

  virtual ClassDistribution distribution(const Instance& instance) const = 0;

  /// Must agree with argmax_lowest(distribution(instance)).
  virtual std::size_t predict(const Instance& instance) const {
    return argmax_lowest(distribution(instance));
  }
};

class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::unique_ptr<Model> fit(const Dataset& train) const = 0;
};

/// A fitted model bound to the spec and schema it was trained with.
/// Immutable and safe for concurrent prediction.
class TrainedModel {
 public:
  TrainedModel(LearnerSpec spec, std::shared_ptr<const Model> model, const Dataset& train);

  std::size_t predict(const Instance& instance) const;
  ClassDistribution class_distribution(const Instance& instance) const;

  const LearnerSpec& spec() const noexcept { return spec_; }
  std::size_t class_count() const noexcept { return class_count_; }
  const Model& model() const noexcept { return *model_; }

 private:
  void check(const Instance& instance) const;

  LearnerSpec spec_;
  std::shared_ptr<const Model> model_;
  std::shared_ptr<const std::vector<AttributeMeta>> attributes_;
  std::size_t class_count_;
};

struct LearnerInfo {
  std::string id;
  std::vector<std::string> hyperparameters;
  std::string description;
  std::function<std::unique_ptr<Learner>(const LearnerSpec&)> factory;
};

/// Maps textual ids to learner factories. The global instance starts with
/// the built-ins; extensions register more at startup.
class LearnerRegistry {
 public:
  static LearnerRegistry& global();

  void add(LearnerInfo info);
  bool contains(std::string_view id) const;
  std::vector<std::string> ids() const;
  const LearnerInfo& info(std::string_view id) const;

  /// Rejects unknown ids and unknown hyperparameter keys.
  std::unique_ptr<Learner> create(const LearnerSpec& spec) const;

 private:
  LearnerRegistry();

  mutable std::mutex mutex_;
  std::map<std::string, LearnerInfo, std::less<>> learners_;
};

/// Checks a spec against the global registry without fitting.
void validate(const LearnerSpec& spec);

/// Fits through the global registry. Failures are rethrown as LearnerError
/// carrying the spec's id.
TrainedModel fit(const LearnerSpec& spec, const Dataset& train);

/// Fraction of test instances predicted as their observed label.
double accuracy(const TrainedModel& model, const Dataset& test);

/// Predicted class for every instance of the dataset.
std::vector<std::size_t> predict_all(const TrainedModel& model, const Dataset& data);

/// Helpers for reading typed hyperparameters; malformed values throw
/// std::invalid_argument naming the key.
namespace hyper {
long long get_int(const LearnerSpec& spec, const std::string& key, long long fallback);
double get_real(const LearnerSpec& spec, const std::string& key, double fallback);
std::string get_text(const LearnerSpec& spec, const std::string& key, const std::string& fallback);
}  // namespace hyper

}  // namespace purgelab
