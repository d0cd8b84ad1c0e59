#include "purgelab/learner.hpp"

#include <charconv>
#include <stdexcept>

#include "purgelab/error.hpp"
#include "purgelab/learners.hpp"
#include "text_util.hpp"

namespace purgelab {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(detail::trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::uint64_t parse_u64(std::string_view text, const std::string& what) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument(what + ": '" + std::string(text) + "' is not an unsigned integer");
  }
  return value;
}

}  // namespace

LearnerSpec LearnerSpec::parse(std::string_view text, std::uint64_t default_seed) {
  const auto parts = split(text, ':');
  LearnerSpec spec;
  spec.id = std::string(parts.front());
  spec.seed = default_seed;
  if (spec.id.empty()) throw std::invalid_argument("empty learner id in '" + std::string(text) + "'");
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw std::invalid_argument("learner '" + spec.id + "': expected key=value, got '" +
                                  std::string(parts[i]) + "'");
    }
    const std::string key(detail::trim(parts[i].substr(0, eq)));
    const std::string value(detail::trim(parts[i].substr(eq + 1)));
    if (key == "seed") {
      spec.seed = parse_u64(value, "learner '" + spec.id + "' seed");
    } else {
      spec.hyperparameters[key] = value;
    }
  }
  return spec;
}

std::string LearnerSpec::to_string() const {
  std::string out = id;
  for (const auto& [key, value] : hyperparameters) out += ":" + key + "=" + value;
  return out;
}

std::vector<LearnerSpec> parse_learner_list(std::string_view text, std::uint64_t seed) {
  text = detail::trim(text);
  if (text == "all") return builtin_learners(seed);
  std::vector<LearnerSpec> specs;
  for (const auto part : split(text, ',')) {
    if (part.empty()) continue;
    specs.push_back(LearnerSpec::parse(part, seed));
  }
  if (specs.empty()) throw std::invalid_argument("empty learner list");
  return specs;
}

std::vector<LearnerSpec> builtin_learners(std::uint64_t seed) {
  std::vector<LearnerSpec> specs;
  for (const char* id : {"decision-tree", "knn", "naive-bayes", "mlp", "one-rule"}) {
    specs.push_back(LearnerSpec{id, {}, seed});
  }
  return specs;
}

std::size_t argmax_lowest(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

TrainedModel::TrainedModel(LearnerSpec spec, std::shared_ptr<const Model> model,
                           const Dataset& train)
    : spec_(std::move(spec)),
      model_(std::move(model)),
      attributes_(std::make_shared<const std::vector<AttributeMeta>>(train.attributes())),
      class_count_(train.class_count()) {}

void TrainedModel::check(const Instance& instance) const {
  const auto& attrs = *attributes_;
  if (instance.values.size() != attrs.size()) {
    throw DataError(DataErrorKind::schema_mismatch,
                    "model '" + spec_.id + "' expects " + std::to_string(attrs.size()) +
                        " cells, instance has " + std::to_string(instance.values.size()));
  }
  for (std::size_t a = 0; a < attrs.size(); ++a) {
    const double v = instance.values[a];
    if (is_missing(v) || attrs[a].is_numeric()) continue;
    if (v < 0 || v >= static_cast<double>(attrs[a].values.size())) {
      throw DataError(DataErrorKind::schema_mismatch,
                      "categorical index out of range for attribute '" + attrs[a].name + "'");
    }
  }
}

std::size_t TrainedModel::predict(const Instance& instance) const {
  check(instance);
  return model_->predict(instance);
}

ClassDistribution TrainedModel::class_distribution(const Instance& instance) const {
  check(instance);
  return model_->distribution(instance);
}

LearnerRegistry::LearnerRegistry() {
  add({"decision-tree",
       {"pruning", "min_leaf", "max_depth", "prune_fraction"},
       "gain-ratio tree, binary numeric splits, multiway categorical, optional reduced-error pruning",
       make_decision_tree});
  add({"knn", {"k"}, "k nearest neighbours under HEOM distance", make_knn});
  add({"naive-bayes", {}, "Gaussian/Laplace naive Bayes", make_naive_bayes});
  add({"mlp", {"hidden", "epochs", "rate"}, "one-hidden-layer perceptron, softmax output", make_mlp});
  add({"one-rule", {"min_bucket"}, "single-attribute rule learner", make_one_rule});
}

LearnerRegistry& LearnerRegistry::global() {
  static LearnerRegistry registry;
  return registry;
}

void LearnerRegistry::add(LearnerInfo info) {
  if (info.id.empty() || !info.factory) throw std::invalid_argument("learner registration needs an id and factory");
  std::lock_guard lock(mutex_);
  learners_[info.id] = std::move(info);
}

bool LearnerRegistry::contains(std::string_view id) const {
  std::lock_guard lock(mutex_);
  return learners_.find(id) != learners_.end();
}

std::vector<std::string> LearnerRegistry::ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, info] : learners_) out.push_back(id);
  return out;
}

const LearnerInfo& LearnerRegistry::info(std::string_view id) const {
  std::lock_guard lock(mutex_);
  const auto it = learners_.find(id);
  if (it == learners_.end()) throw std::invalid_argument("unknown learner '" + std::string(id) + "'");
  return it->second;
}

std::unique_ptr<Learner> LearnerRegistry::create(const LearnerSpec& spec) const {
  const LearnerInfo& entry = info(spec.id);
  for (const auto& [key, value] : spec.hyperparameters) {
    if (std::find(entry.hyperparameters.begin(), entry.hyperparameters.end(), key) ==
        entry.hyperparameters.end()) {
      throw std::invalid_argument("learner '" + spec.id + "': unknown hyperparameter '" + key + "'");
    }
  }
  return entry.factory(spec);
}

void validate(const LearnerSpec& spec) { LearnerRegistry::global().create(spec); }

TrainedModel fit(const LearnerSpec& spec, const Dataset& train) {
  const auto learner = LearnerRegistry::global().create(spec);
  try {
    return TrainedModel(spec, learner->fit(train), train);
  } catch (const LearnerError&) {
    throw;
  } catch (const std::exception& e) {
    throw LearnerError(spec.to_string(), "fit on '" + train.name() + "' failed: " + e.what());
  }
}

double accuracy(const TrainedModel& model, const Dataset& test) {
  std::size_t correct = 0;
  for (const auto& inst : test.instances()) {
    if (model.predict(inst) == inst.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

std::vector<std::size_t> predict_all(const TrainedModel& model, const Dataset& data) {
  std::vector<std::size_t> out;
  out.reserve(data.size());
  for (const auto& inst : data.instances()) out.push_back(model.predict(inst));
  return out;
}

namespace hyper {

long long get_int(const LearnerSpec& spec, const std::string& key, long long fallback) {
  const auto it = spec.hyperparameters.find(key);
  if (it == spec.hyperparameters.end()) return fallback;
  long long value = 0;
  const auto& text = it->second;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("learner '" + spec.id + "': " + key + "='" + text +
                                "' is not an integer");
  }
  return value;
}

double get_real(const LearnerSpec& spec, const std::string& key, double fallback) {
  const auto it = spec.hyperparameters.find(key);
  if (it == spec.hyperparameters.end()) return fallback;
  const auto value = detail::parse_real(it->second);
  if (!value) {
    throw std::invalid_argument("learner '" + spec.id + "': " + key + "='" + it->second +
                                "' is not a number");
  }
  return *value;
}

std::string get_text(const LearnerSpec& spec, const std::string& key, const std::string& fallback) {
  const auto it = spec.hyperparameters.find(key);
  return it == spec.hyperparameters.end() ? fallback : it->second;
}

}  // namespace hyper

}  // namespace purgelab
