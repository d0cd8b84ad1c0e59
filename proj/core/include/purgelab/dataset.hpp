#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace purgelab {

enum class AttributeKind { numeric, categorical };

struct AttributeMeta {
  std::string name;
  AttributeKind kind = AttributeKind::numeric;
  /// Value list of a categorical attribute; empty for numeric attributes.
  std::vector<std::string> values;

  static AttributeMeta numeric(std::string name);
  static AttributeMeta categorical(std::string name, std::vector<std::string> values);

  bool is_numeric() const noexcept { return kind == AttributeKind::numeric; }
  bool is_categorical() const noexcept { return kind == AttributeKind::categorical; }
  std::optional<std::size_t> index_of(std::string_view value) const;

  bool operator==(const AttributeMeta&) const = default;
};

/// Cells hold either a real value or a categorical value index stored as a
/// double. NaN marks a missing cell.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double cell) noexcept { return std::isnan(cell); }

struct Instance {
  std::vector<double> values;
  /// Observed (possibly noisy) class index.
  std::size_t label = 0;

  /// Field-wise equality where two missing cells compare equal.
  bool operator==(const Instance& other) const;
};

/// A labeled training set with its attribute schema. Immutable once built;
/// the constructor enforces the schema invariants.
class Dataset {
 public:
  Dataset(std::string name, std::vector<AttributeMeta> attributes,
          std::vector<std::string> class_names, std::vector<Instance> instances,
          std::string class_attribute = "class");

  const std::string& name() const noexcept { return name_; }
  const std::string& class_attribute() const noexcept { return class_attribute_; }
  const std::vector<AttributeMeta>& attributes() const noexcept { return attributes_; }
  const AttributeMeta& attribute(std::size_t index) const { return attributes_.at(index); }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  const std::vector<Instance>& instances() const noexcept { return instances_; }
  const Instance& instance(std::size_t index) const { return instances_.at(index); }

  std::size_t size() const noexcept { return instances_.size(); }
  std::size_t attribute_count() const noexcept { return attributes_.size(); }
  std::size_t class_count() const noexcept { return class_names_.size(); }

  /// Instances per class index.
  std::vector<std::size_t> class_counts() const;

  /// Dataset restricted to the given instance indices, in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;

  /// Same instances with replaced labels.
  Dataset with_labels(std::span<const std::size_t> labels) const;

  Dataset renamed(std::string name) const;

  /// Throws DataError(schema_mismatch) if the instance does not conform.
  void check_instance(const Instance& instance) const;

  bool operator==(const Dataset&) const = default;

 private:
  std::string name_;
  std::vector<AttributeMeta> attributes_;
  std::vector<std::string> class_names_;
  std::vector<Instance> instances_;
  std::string class_attribute_;
};

/// Stratified assignment of instances to cross-validation folds.
class FoldPlan {
 public:
  FoldPlan(std::size_t fold_count, std::uint64_t seed, std::vector<std::size_t> assignment);

  std::size_t fold_count() const noexcept { return fold_count_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::vector<std::size_t>& assignment() const noexcept { return assignment_; }

  std::vector<std::size_t> train_indices(std::size_t fold) const;
  std::vector<std::size_t> test_indices(std::size_t fold) const;

  bool operator==(const FoldPlan&) const = default;

 private:
  std::size_t fold_count_;
  std::uint64_t seed_;
  std::vector<std::size_t> assignment_;
};

/// Repeated k-fold cross-validation settings. Repeat r partitions with
/// stratified_folds(data, folds, repeat_seed(r)).
struct CvProtocol {
  std::size_t repeats = 1;
  std::size_t folds = 10;
  std::uint64_t seed = 0;

  std::uint64_t repeat_seed(std::size_t repeat) const;
};

/// Each class's instances (in dataset order) are shuffled with Rng(seed),
/// classes taken in index order, then dealt round-robin to folds. The deal
/// position carries over from one class to the next so fold totals stay
/// balanced as well.
FoldPlan stratified_folds(const Dataset& dataset, std::size_t fold_count, std::uint64_t seed);

struct NumericRange {
  double min = 0.0;
  double max = 0.0;

  double width() const noexcept { return max - min; }
  bool operator==(const NumericRange&) const = default;
};

/// One entry per attribute. nullopt for categorical attributes and for
/// numeric attributes whose cells are all missing (undefined range).
std::vector<std::optional<NumericRange>> min_max_ranges(const Dataset& dataset);

}  // namespace purgelab
