#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "purgelab/learners.hpp"

namespace purgelab {

namespace {

using Counts = std::vector<double>;

double errors_of(const Counts& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  return total - *std::max_element(counts.begin(), counts.end());
}

ClassDistribution normalized_or(const Counts& counts, const ClassDistribution& fallback) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total <= 0) return fallback;
  ClassDistribution out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] / total;
  return out;
}

// The rule for one attribute: a distribution per bucket plus one for
// missing cells.
struct Rule {
  std::size_t attribute = 0;
  bool numeric = false;
  std::vector<double> breakpoints;  // numeric: bucket b holds values <= breakpoints[b]
  std::vector<ClassDistribution> buckets;
  ClassDistribution missing;
  double errors = 0.0;
};

class OneRuleModel : public Model {
 public:
  OneRuleModel(std::optional<Rule> rule, ClassDistribution prior)
      : rule_(std::move(rule)), prior_(std::move(prior)) {}

  ClassDistribution distribution(const Instance& instance) const override {
    if (!rule_) return prior_;
    const double v = instance.values[rule_->attribute];
    if (is_missing(v)) return rule_->missing;
    if (!rule_->numeric) return rule_->buckets[static_cast<std::size_t>(v)];
    const auto it = std::lower_bound(rule_->breakpoints.begin(), rule_->breakpoints.end(), v);
    return rule_->buckets[static_cast<std::size_t>(it - rule_->breakpoints.begin())];
  }

 private:
  std::optional<Rule> rule_;
  ClassDistribution prior_;
};

class OneRuleLearner : public Learner {
 public:
  explicit OneRuleLearner(std::size_t min_bucket) : min_bucket_(min_bucket) {}

  std::unique_ptr<Model> fit(const Dataset& train) const override {
    const std::size_t classes = train.class_count();
    Counts all(classes, 0.0);
    for (const auto& inst : train.instances()) all[inst.label] += 1.0;
    const ClassDistribution prior = normalized_or(all, ClassDistribution(classes, 1.0 / static_cast<double>(classes)));

    std::optional<Rule> best;
    for (std::size_t a = 0; a < train.attribute_count(); ++a) {
      Rule rule = train.attribute(a).is_numeric() ? numeric_rule(train, a, prior)
                                                  : categorical_rule(train, a, prior);
      if (!best || rule.errors < best->errors) best = std::move(rule);
    }
    return std::make_unique<OneRuleModel>(std::move(best), prior);
  }

 private:
  static Rule categorical_rule(const Dataset& train, std::size_t a, const ClassDistribution& prior) {
    const std::size_t classes = train.class_count();
    const std::size_t values = train.attribute(a).values.size();
    std::vector<Counts> counts(values, Counts(classes, 0.0));
    Counts missing(classes, 0.0);
    for (const auto& inst : train.instances()) {
      const double v = inst.values[a];
      (is_missing(v) ? missing : counts[static_cast<std::size_t>(v)])[inst.label] += 1.0;
    }
    Rule rule;
    rule.attribute = a;
    rule.errors = errors_of(missing);
    for (const auto& c : counts) {
      rule.errors += errors_of(c);
      rule.buckets.push_back(normalized_or(c, prior));
    }
    rule.missing = normalized_or(missing, prior);
    return rule;
  }

  // Greedy bucketing: grow a bucket (whole runs of equal values at a time)
  // until its majority class has min_bucket members, then keep absorbing
  // instances of that majority class. Adjacent buckets with the same
  // majority are merged afterwards.
  Rule numeric_rule(const Dataset& train, std::size_t a, const ClassDistribution& prior) const {
    const std::size_t classes = train.class_count();
    std::vector<std::pair<double, std::size_t>> known;
    Counts missing(classes, 0.0);
    for (const auto& inst : train.instances()) {
      const double v = inst.values[a];
      if (is_missing(v)) {
        missing[inst.label] += 1.0;
      } else {
        known.emplace_back(v, inst.label);
      }
    }
    std::stable_sort(known.begin(), known.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });

    struct Bucket {
      Counts counts;
      double first = 0.0;
      double last = 0.0;
    };
    std::vector<Bucket> buckets;
    std::size_t i = 0;
    auto take_run = [&](Bucket& b) {
      const double v = known[i].first;
      while (i < known.size() && known[i].first == v) {
        b.counts[known[i].second] += 1.0;
        ++i;
      }
      b.last = v;
    };
    while (i < known.size()) {
      Bucket b{Counts(classes, 0.0), known[i].first, known[i].first};
      take_run(b);
      while (i < known.size() &&
             *std::max_element(b.counts.begin(), b.counts.end()) < static_cast<double>(min_bucket_)) {
        take_run(b);
      }
      const std::size_t majority = argmax_lowest(b.counts);
      while (i < known.size() && known[i].second == majority) take_run(b);
      if (!buckets.empty() && argmax_lowest(buckets.back().counts) == argmax_lowest(b.counts)) {
        for (std::size_t c = 0; c < classes; ++c) buckets.back().counts[c] += b.counts[c];
        buckets.back().last = b.last;
      } else {
        buckets.push_back(std::move(b));
      }
    }
    std::vector<double> breakpoints;
    for (std::size_t b = 0; b + 1 < buckets.size(); ++b) {
      const double lo = buckets[b].last;
      const double hi = buckets[b + 1].first;
      double cut = lo + (hi - lo) / 2.0;
      if (!(cut < hi)) cut = lo;
      breakpoints.push_back(cut);
    }
    const auto& merged = buckets;

    Rule rule;
    rule.attribute = a;
    rule.numeric = true;
    rule.breakpoints = std::move(breakpoints);
    rule.errors = errors_of(missing);
    for (const auto& b : merged) {
      rule.errors += errors_of(b.counts);
      rule.buckets.push_back(normalized_or(b.counts, prior));
    }
    if (rule.buckets.empty()) rule.buckets.push_back(prior);
    rule.missing = normalized_or(missing, prior);
    return rule;
  }

  std::size_t min_bucket_;
};

}  // namespace

std::unique_ptr<Learner> make_one_rule(const LearnerSpec& spec) {
  const long long min_bucket = hyper::get_int(spec, "min_bucket", 6);
  if (min_bucket < 1) throw std::invalid_argument("one-rule: min_bucket must be >= 1");
  return std::make_unique<OneRuleLearner>(static_cast<std::size_t>(min_bucket));
}

}  // namespace purgelab
