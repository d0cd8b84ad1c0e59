#include "purgelab/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "purgelab/error.hpp"
#include "purgelab/random.hpp"

namespace purgelab {

AttributeMeta AttributeMeta::numeric(std::string name) {
  return AttributeMeta{std::move(name), AttributeKind::numeric, {}};
}

AttributeMeta AttributeMeta::categorical(std::string name, std::vector<std::string> values) {
  return AttributeMeta{std::move(name), AttributeKind::categorical, std::move(values)};
}

std::optional<std::size_t> AttributeMeta::index_of(std::string_view value) const {
  const auto it = std::find(values.begin(), values.end(), value);
  if (it == values.end()) return std::nullopt;
  return static_cast<std::size_t>(it - values.begin());
}

bool Instance::operator==(const Instance& other) const {
  if (label != other.label || values.size() != other.values.size()) return false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool ma = is_missing(values[i]);
    const bool mb = is_missing(other.values[i]);
    if (ma != mb) return false;
    if (!ma && values[i] != other.values[i]) return false;
  }
  return true;
}

namespace {

void require_unique(const std::vector<std::string>& names, const std::string& what) {
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) {
      throw DataError(DataErrorKind::malformed, "duplicate " + what + " '" + n + "'");
    }
  }
}

}  // namespace

Dataset::Dataset(std::string name, std::vector<AttributeMeta> attributes,
                 std::vector<std::string> class_names, std::vector<Instance> instances,
                 std::string class_attribute)
    : name_(std::move(name)),
      attributes_(std::move(attributes)),
      class_names_(std::move(class_names)),
      instances_(std::move(instances)),
      class_attribute_(std::move(class_attribute)) {
  if (class_names_.size() < 2) {
    throw DataError(DataErrorKind::degenerate,
                    "dataset '" + name_ + "' needs at least 2 classes");
  }
  if (instances_.empty()) {
    throw DataError(DataErrorKind::degenerate, "dataset '" + name_ + "' has no instances");
  }
  require_unique(class_names_, "class name");
  std::vector<std::string> names;
  for (const auto& a : attributes_) {
    if (a.is_categorical()) {
      if (a.values.empty()) {
        throw DataError(DataErrorKind::malformed,
                        "categorical attribute '" + a.name + "' has no values");
      }
      require_unique(a.values, "value of attribute '" + a.name + "'");
    }
    names.push_back(a.name);
  }
  require_unique(names, "attribute name");
  for (const auto& inst : instances_) check_instance(inst);
}

void Dataset::check_instance(const Instance& inst) const {
  if (inst.values.size() != attributes_.size()) {
    throw DataError(DataErrorKind::schema_mismatch,
                    "instance has " + std::to_string(inst.values.size()) + " cells, schema has " +
                        std::to_string(attributes_.size()));
  }
  if (inst.label >= class_names_.size()) {
    throw DataError(DataErrorKind::schema_mismatch,
                    "label index " + std::to_string(inst.label) + " out of range");
  }
  for (std::size_t a = 0; a < attributes_.size(); ++a) {
    const double v = inst.values[a];
    if (is_missing(v) || attributes_[a].is_numeric()) continue;
    if (v < 0 || v != std::floor(v) || v >= static_cast<double>(attributes_[a].values.size())) {
      throw DataError(DataErrorKind::schema_mismatch,
                      "bad categorical index for attribute '" + attributes_[a].name + "'");
    }
  }
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_names_.size(), 0);
  for (const auto& inst : instances_) ++counts[inst.label];
  return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Instance> picked;
  picked.reserve(indices.size());
  for (const std::size_t i : indices) picked.push_back(instances_.at(i));
  return Dataset(name_, attributes_, class_names_, std::move(picked), class_attribute_);
}

Dataset Dataset::with_labels(std::span<const std::size_t> labels) const {
  if (labels.size() != instances_.size()) {
    throw std::invalid_argument("with_labels: label count does not match instance count");
  }
  std::vector<Instance> relabeled = instances_;
  for (std::size_t i = 0; i < labels.size(); ++i) relabeled[i].label = labels[i];
  return Dataset(name_, attributes_, class_names_, std::move(relabeled), class_attribute_);
}

Dataset Dataset::renamed(std::string name) const {
  Dataset copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

FoldPlan::FoldPlan(std::size_t fold_count, std::uint64_t seed, std::vector<std::size_t> assignment)
    : fold_count_(fold_count), seed_(seed), assignment_(std::move(assignment)) {
  for (const auto f : assignment_) {
    if (f >= fold_count_) throw std::invalid_argument("fold index out of range");
  }
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    if (assignment_[i] != fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    if (assignment_[i] == fold) out.push_back(i);
  }
  return out;
}

FoldPlan stratified_folds(const Dataset& dataset, std::size_t fold_count, std::uint64_t seed) {
  if (fold_count < 2) throw std::invalid_argument("fold_count must be at least 2");
  if (fold_count > dataset.size()) {
    throw std::invalid_argument("fold_count " + std::to_string(fold_count) +
                                " exceeds instance count " + std::to_string(dataset.size()));
  }
  std::vector<std::vector<std::size_t>> by_class(dataset.class_count());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    by_class[dataset.instance(i).label].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> assignment(dataset.size(), 0);
  std::size_t position = 0;
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    for (const std::size_t i : members) {
      assignment[i] = position % fold_count;
      ++position;
    }
  }
  return FoldPlan(fold_count, seed, std::move(assignment));
}

std::uint64_t CvProtocol::repeat_seed(std::size_t repeat) const {
  return mix_seed({seed, static_cast<std::uint64_t>(repeat)});
}

std::vector<std::optional<NumericRange>> min_max_ranges(const Dataset& dataset) {
  std::vector<std::optional<NumericRange>> ranges(dataset.attribute_count());
  for (std::size_t a = 0; a < dataset.attribute_count(); ++a) {
    if (!dataset.attribute(a).is_numeric()) continue;
    for (const auto& inst : dataset.instances()) {
      const double v = inst.values[a];
      if (is_missing(v)) continue;
      if (!ranges[a]) {
        ranges[a] = NumericRange{v, v};
      } else {
        ranges[a]->min = std::min(ranges[a]->min, v);
        ranges[a]->max = std::max(ranges[a]->max, v);
      }
    }
  }
  return ranges;
}

}  // namespace purgelab
