#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "purgelab/evalstats.hpp"

namespace purgelab {

namespace {

constexpr double kEqualTolerance = 1e-9;

// Per-dataset mean accuracy of each (learner, condition), datasets in
// first-appearance order.
class MeanIndex {
 public:
  explicit MeanIndex(const ExperimentResult& result) {
    for (const auto& c : result.cells) {
      if (std::find(datasets_.begin(), datasets_.end(), c.dataset) == datasets_.end()) {
        datasets_.push_back(c.dataset);
      }
      if (std::find(learners_.begin(), learners_.end(), c.learner) == learners_.end()) {
        learners_.push_back(c.learner);
      }
      const Key key{c.learner, c.condition};
      if (!sums_.count(key)) order_.push_back(key);
      auto& slot = sums_[key][c.dataset];
      if (!c.failed()) {
        slot.first += c.accuracy;
        ++slot.second;
      }
    }
  }

  using Key = std::pair<std::string, std::string>;

  const std::vector<std::string>& datasets() const { return datasets_; }
  const std::vector<std::string>& learners() const { return learners_; }
  const std::vector<Key>& keys() const { return order_; }

  std::optional<double> mean(const std::string& learner, std::string_view condition,
                             const std::string& dataset) const {
    const std::string cond(condition);
    const std::string max_suffix = "@max";
    if (cond.size() > max_suffix.size() && cond.ends_with(max_suffix)) {
      const std::string prefix = cond.substr(0, cond.size() - 3);
      std::optional<double> best;
      for (const auto& [key, per_dataset] : sums_) {
        if (key.first != learner || !key.second.starts_with(prefix)) continue;
        const auto m = direct(key, dataset);
        if (m && (!best || *m > *best)) best = m;
      }
      return best;
    }
    return direct(Key{learner, cond}, dataset);
  }

 private:
  std::optional<double> direct(const Key& key, const std::string& dataset) const {
    const auto it = sums_.find(key);
    if (it == sums_.end()) return std::nullopt;
    const auto jt = it->second.find(dataset);
    if (jt == it->second.end() || jt->second.second == 0) return std::nullopt;
    return jt->second.first / static_cast<double>(jt->second.second);
  }

  std::vector<std::string> datasets_;
  std::vector<std::string> learners_;
  std::vector<Key> order_;
  std::map<Key, std::map<std::string, std::pair<double, std::size_t>>> sums_;
};

double average(const std::vector<double>& values) {
  if (values.empty()) return std::nan("");
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::string fixed(double value, int digits) {
  if (std::isnan(value)) return "nan";
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", digits, value);
  return buffer;
}

}  // namespace

SummaryTable summarize(const ExperimentResult& result, std::string_view baseline,
                       std::string_view comparison) {
  const MeanIndex index(result);
  SummaryTable table;
  table.baseline = baseline;
  table.comparison = comparison;
  bool saw_baseline = false, saw_comparison = false;
  for (const auto& learner : index.learners()) {
    SummaryRow row;
    row.learner = learner;
    for (const auto& dataset : index.datasets()) {
      const auto b = index.mean(learner, baseline, dataset);
      const auto c = index.mean(learner, comparison, dataset);
      saw_baseline = saw_baseline || b.has_value();
      saw_comparison = saw_comparison || c.has_value();
      if (!b || !c) continue;
      row.datasets.push_back(dataset);
      row.baseline_means.push_back(*b);
      row.comparison_means.push_back(*c);
      const double diff = *c - *b;
      if (std::abs(diff) <= kEqualTolerance) {
        ++row.equal;
      } else if (diff > 0) {
        ++row.greater;
      } else {
        ++row.less;
      }
    }
    if (row.datasets.empty()) continue;
    row.baseline_mean = average(row.baseline_means);
    row.comparison_mean = average(row.comparison_means);
    row.wilcoxon = wilcoxon_signed_ranks(row.comparison_means, row.baseline_means);
    table.rows.push_back(std::move(row));
  }
  if (!saw_baseline) throw std::invalid_argument("condition '" + std::string(baseline) + "' not in results");
  if (!saw_comparison) {
    throw std::invalid_argument("condition '" + std::string(comparison) + "' not in results");
  }
  return table;
}

std::string format_table(const SummaryTable& table) {
  std::ostringstream out;
  out << table.comparison << " vs " << table.baseline << '\n';
  std::size_t width = 8;
  for (const auto& row : table.rows) width = std::max(width, row.learner.size());
  auto pad = [&](const std::string& s) { return s + std::string(width - s.size() + 2, ' '); };
  out << pad("learner") << "baseline  compare   >/=/<     p\n";
  for (const auto& row : table.rows) {
    std::string counts = std::to_string(row.greater) + "/" + std::to_string(row.equal) + "/" +
                         std::to_string(row.less);
    counts.resize(std::max<std::size_t>(counts.size(), 10), ' ');
    out << pad(row.learner) << fixed(row.baseline_mean, 4) << "    " << fixed(row.comparison_mean, 4)
        << "    " << counts << fixed(row.wilcoxon.p_two_sided, 4) << '\n';
  }
  if (table.rows.empty()) out << "(no learner has both conditions)\n";
  return out.str();
}

std::string summary_json(const ExperimentResult& result, std::span<const SummaryTable> tables) {
  using nlohmann::ordered_json;
  const MeanIndex index(result);
  ordered_json doc;
  doc["schema"] = kSummarySchema;
  doc["seed"] = result.seed;
  doc["cells"] = result.cells.size();

  ordered_json means = ordered_json::array();
  for (const auto& [learner, condition] : index.keys()) {
    ordered_json entry;
    entry["learner"] = learner;
    entry["condition"] = condition;
    ordered_json per_dataset = ordered_json::object();
    std::vector<double> values;
    for (const auto& dataset : index.datasets()) {
      const auto m = index.mean(learner, condition, dataset);
      if (!m) continue;
      per_dataset[dataset] = *m;
      values.push_back(*m);
    }
    entry["datasets"] = per_dataset;
    entry["mean"] = values.empty() ? ordered_json(nullptr) : ordered_json(average(values));
    means.push_back(entry);
  }
  doc["means"] = means;

  ordered_json comparisons = ordered_json::array();
  for (const auto& table : tables) {
    ordered_json t;
    t["baseline"] = table.baseline;
    t["comparison"] = table.comparison;
    ordered_json rows = ordered_json::array();
    for (const auto& row : table.rows) {
      ordered_json r;
      r["learner"] = row.learner;
      r["datasets"] = row.datasets.size();
      r["baseline_mean"] = row.baseline_mean;
      r["comparison_mean"] = row.comparison_mean;
      r["greater"] = row.greater;
      r["equal"] = row.equal;
      r["less"] = row.less;
      r["wilcoxon"] = {{"n_effective", row.wilcoxon.n_effective},
                       {"w_plus", row.wilcoxon.w_plus},
                       {"w_minus", row.wilcoxon.w_minus},
                       {"p_two_sided", row.wilcoxon.p_two_sided},
                       {"method", row.wilcoxon.method == WilcoxonResult::Method::exact
                                      ? "exact"
                                      : "normal-approximation"}};
      rows.push_back(r);
    }
    t["rows"] = rows;
    comparisons.push_back(t);
  }
  doc["comparisons"] = comparisons;

  ordered_json failed = ordered_json::array();
  for (const auto& c : result.cells) {
    if (!c.failed()) continue;
    failed.push_back({{"dataset", c.dataset},
                      {"repeat", c.repeat},
                      {"fold", c.fold},
                      {"learner", c.learner},
                      {"condition", c.condition},
                      {"error", c.error}});
  }
  doc["failed_cells"] = failed;
  doc["warnings"] = result.warnings;
  return doc.dump(2) + "\n";
}

}  // namespace purgelab
