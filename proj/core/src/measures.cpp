#include "purgelab/measures.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "purgelab/error.hpp"
#include "purgelab/filters.hpp"
#include "purgelab/heom.hpp"
#include "purgelab/learners.hpp"

namespace purgelab {

std::vector<double> instance_hardness(const Dataset& dataset, std::span<const LearnerSpec> specs,
                                      const CvProtocol& protocol, std::size_t jobs) {
  if (specs.empty()) throw std::invalid_argument("instance_hardness needs at least one learner");
  if (protocol.repeats < 1) throw std::invalid_argument("instance_hardness needs at least one repeat");
  std::vector<double> ih(dataset.size(), 0.0);
  for (std::size_t r = 0; r < protocol.repeats; ++r) {
    const auto mode = FlagMode::cross_validated(protocol.folds, protocol.repeat_seed(r));
    const auto matrix = flag_misclassified(specs, dataset, mode, jobs);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      ih[i] += static_cast<double>(matrix.misclassified_count(i)) / static_cast<double>(specs.size());
    }
  }
  for (auto& v : ih) v /= static_cast<double>(protocol.repeats);
  return ih;
}

NoisyReport noisy_instances(std::span<const double> hardness, double cutoff) {
  if (!(cutoff >= 0.0 && cutoff <= 1.0)) throw std::invalid_argument("cutoff must lie in [0, 1]");
  NoisyReport report;
  for (std::size_t i = 0; i < hardness.size(); ++i) {
    if (hardness[i] > cutoff) report.indices.push_back(i);
  }
  if (!hardness.empty()) {
    report.percent = 100.0 * static_cast<double>(report.indices.size()) / static_cast<double>(hardness.size());
  }
  return report;
}

namespace {

std::vector<double> distance_matrix(const Dataset& dataset, const HeomMetric& metric) {
  const std::size_t n = dataset.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d[i * n + j] = d[j * n + i] = metric.distance(dataset.instance(i), dataset.instance(j));
    }
  }
  return d;
}

const DecisionTreeModel& as_tree(const TrainedModel& model) {
  const auto* tree = dynamic_cast<const DecisionTreeModel*>(&model.model());
  if (!tree) throw std::logic_error("decision-tree learner did not produce a tree model");
  return *tree;
}

}  // namespace

std::vector<double> k_disagreeing_neighbors(const Dataset& dataset, std::size_t k) {
  const std::size_t n = dataset.size();
  if (k < 1 || k >= n) throw std::invalid_argument("kDN needs 1 <= k < instance count");
  const auto metric = HeomMetric::fit(dataset);
  std::vector<double> out(n);
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t i = 0; i < n; ++i) {
    scored.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) scored.emplace_back(metric.distance(dataset.instance(i), dataset.instance(j)), j);
    }
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end());
    std::size_t disagree = 0;
    for (std::size_t m = 0; m < k; ++m) {
      disagree += dataset.instance(scored[m].second).label != dataset.instance(i).label ? 1 : 0;
    }
    out[i] = static_cast<double>(disagree) / static_cast<double>(k);
  }
  return out;
}

HardnessProfile hardness_measures(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
  const std::size_t n = dataset.size();
  HardnessProfile p;
  p.kdn = k_disagreeing_neighbors(dataset, k);

  LearnerSpec unpruned{"decision-tree", {{"pruning", "none"}}, seed};
  LearnerSpec pruned{"decision-tree", {{"pruning", "rep"}}, seed};
  const TrainedModel full_fit = fit(unpruned, dataset);
  const TrainedModel pruned_fit = fit(pruned, dataset);
  const TrainedModel bayes = fit(LearnerSpec{"naive-bayes", {}, seed}, dataset);
  const auto& full_tree = as_tree(full_fit);
  const auto& pruned_tree = as_tree(pruned_fit);
  const double largest = full_tree.largest_leaf_coverage();

  const auto counts = dataset.class_counts();
  const double majority = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
  const double classes = static_cast<double>(dataset.class_count());

  for (std::size_t i = 0; i < n; ++i) {
    const Instance& inst = dataset.instance(i);
    const std::size_t y = inst.label;

    p.ds.push_back(full_tree.leaf_for(inst).coverage() / largest);

    const TreeLeaf leaf = pruned_tree.leaf_for(inst);
    const double coverage = leaf.coverage();
    p.dcp.push_back(coverage > 0.0 ? leaf.class_counts[y] / coverage : 0.0);
    p.td.push_back(static_cast<double>(leaf.depth));

    const auto dist = bayes.class_distribution(inst);
    double other = 0.0;
    for (std::size_t c = 0; c < dist.size(); ++c) {
      if (c != y) other = std::max(other, dist[c]);
    }
    p.cl.push_back(dist[y]);
    p.cld.push_back(dist[y] - other);

    p.mv.push_back(static_cast<double>(counts[y]) / majority);
    p.cb.push_back(static_cast<double>(counts[y]) / static_cast<double>(n) - 1.0 / classes);
  }
  return p;
}

namespace {

struct Span {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  bool empty() const { return lo > hi; }
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

Span span_of(const Dataset& data, std::span<const std::size_t> rows, std::size_t attribute) {
  Span s;
  for (const auto i : rows) {
    const double v = data.instance(i).values[attribute];
    if (!is_missing(v)) s.add(v);
  }
  return s;
}

// Instances in `rows` whose value lies outside the overlap of the two
// classes' spans on the attribute. Missing cells never count as separated.
std::vector<std::size_t> separated(const Dataset& data, std::span<const std::size_t> rows_a,
                                   std::span<const std::size_t> rows_b, std::size_t attribute) {
  const Span a = span_of(data, rows_a, attribute);
  const Span b = span_of(data, rows_b, attribute);
  std::vector<std::size_t> out;
  const bool any_overlap = !a.empty() && !b.empty();
  const double lo = std::max(a.lo, b.lo);
  const double hi = std::min(a.hi, b.hi);
  auto visit = [&](std::span<const std::size_t> rows) {
    for (const auto i : rows) {
      const double v = data.instance(i).values[attribute];
      if (is_missing(v)) continue;
      if (!any_overlap || v < lo || v > hi) out.push_back(i);
    }
  };
  visit(rows_a);
  visit(rows_b);
  return out;
}

double pair_f2(const Dataset& data, std::span<const std::size_t> a, std::span<const std::size_t> b,
               std::span<const std::size_t> numeric) {
  double product = 1.0;
  for (const auto attr : numeric) {
    const Span sa = span_of(data, a, attr);
    const Span sb = span_of(data, b, attr);
    if (sa.empty() || sb.empty()) continue;
    const double overlap = std::max(0.0, std::min(sa.hi, sb.hi) - std::max(sa.lo, sb.lo));
    const double joint = std::max(sa.hi, sb.hi) - std::min(sa.lo, sb.lo);
    product *= joint > 0.0 ? overlap / joint : 1.0;
  }
  return product;
}

double pair_f3(const Dataset& data, std::span<const std::size_t> a, std::span<const std::size_t> b,
               std::span<const std::size_t> numeric) {
  std::size_t best = 0;
  for (const auto attr : numeric) best = std::max(best, separated(data, a, b, attr).size());
  return static_cast<double>(best) / static_cast<double>(a.size() + b.size());
}

double pair_f4(const Dataset& data, std::vector<std::size_t> a, std::vector<std::size_t> b,
               std::span<const std::size_t> numeric) {
  const std::size_t total = a.size() + b.size();
  std::vector<bool> used(numeric.size(), false);
  while (!a.empty() || !b.empty()) {
    if (a.empty() || b.empty()) {
      a.clear();
      b.clear();
      break;
    }
    std::optional<std::size_t> pick;
    std::vector<std::size_t> pick_rows;
    for (std::size_t k = 0; k < numeric.size(); ++k) {
      if (used[k]) continue;
      auto rows = separated(data, a, b, numeric[k]);
      if (!pick || rows.size() > pick_rows.size()) {
        pick = k;
        pick_rows = std::move(rows);
      }
    }
    if (!pick || pick_rows.empty()) break;
    used[*pick] = true;
    std::sort(pick_rows.begin(), pick_rows.end());
    auto drop = [&](std::vector<std::size_t>& rows) {
      std::erase_if(rows, [&](std::size_t i) {
        return std::binary_search(pick_rows.begin(), pick_rows.end(), i);
      });
    };
    drop(a);
    drop(b);
  }
  return static_cast<double>(total - a.size() - b.size()) / static_cast<double>(total);
}

double mst_boundary_fraction(const Dataset& data, std::span<const double> d) {
  const std::size_t n = data.size();
  if (n < 2) return 0.0;
  std::vector<bool> in_tree(n, false);
  std::vector<double> key(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, n);
  std::vector<bool> boundary(n, false);
  key[0] = 0.0;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t v = n;
    for (std::size_t u = 0; u < n; ++u) {
      if (!in_tree[u] && (v == n || key[u] < key[v])) v = u;
    }
    in_tree[v] = true;
    if (parent[v] != n && data.instance(v).label != data.instance(parent[v]).label) {
      boundary[v] = boundary[parent[v]] = true;
    }
    for (std::size_t u = 0; u < n; ++u) {
      if (!in_tree[u] && d[v * n + u] < key[u]) {
        key[u] = d[v * n + u];
        parent[u] = v;
      }
    }
  }
  return static_cast<double>(std::count(boundary.begin(), boundary.end(), true)) / static_cast<double>(n);
}

double intra_inter_ratio(const Dataset& data, std::span<const double> d) {
  const std::size_t n = data.size();
  double intra = 0.0, inter = 0.0;
  std::size_t intra_count = 0, inter_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double same = std::numeric_limits<double>::infinity();
    double other = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (data.instance(j).label == data.instance(i).label) {
        same = std::min(same, d[i * n + j]);
      } else {
        other = std::min(other, d[i * n + j]);
      }
    }
    if (std::isfinite(same)) {
      intra += same;
      ++intra_count;
    }
    if (std::isfinite(other)) {
      inter += other;
      ++inter_count;
    }
  }
  const double mean_intra = intra_count ? intra / static_cast<double>(intra_count) : 0.0;
  const double mean_inter = inter_count ? inter / static_cast<double>(inter_count) : 0.0;
  return mean_intra / std::max(mean_inter, 1e-12);
}

// Leave-one-out 1-NN error. Ranges are refit without the held-out
// instance and neighbours ordered by (distance, label), as a knn model with
// k = 1 trained on the remaining instances would do.
double loo_one_nn_error(const Dataset& data) {
  const std::size_t n = data.size();
  const std::size_t attrs = data.attribute_count();
  std::vector<AttributeKind> kinds;
  for (const auto& a : data.attributes()) kinds.push_back(a.kind);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::optional<NumericRange>> ranges(attrs);
    for (std::size_t a = 0; a < attrs; ++a) {
      if (kinds[a] != AttributeKind::numeric) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double v = data.instance(j).values[a];
        if (is_missing(v)) continue;
        if (!ranges[a]) {
          ranges[a] = NumericRange{v, v};
        } else {
          ranges[a]->min = std::min(ranges[a]->min, v);
          ranges[a]->max = std::max(ranges[a]->max, v);
        }
      }
    }
    const HeomMetric metric(kinds, std::move(ranges));
    std::pair<double, std::size_t> best{std::numeric_limits<double>::infinity(), 0};
    bool found = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const std::pair<double, std::size_t> cand{metric.distance(data.instance(i), data.instance(j)),
                                                data.instance(j).label};
      if (!found || cand < best) {
        best = cand;
        found = true;
      }
    }
    if (found && best.second != data.instance(i).label) ++errors;
    if (!found) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(n);
}

// Each instance's sphere reaches its nearest other-class instance and so
// covers the same-class instances strictly closer than that. A sphere is
// absorbed when a retained sphere (larger radius first, ties by index)
// covers a superset of its instances.
double sphere_fraction(const Dataset& data, std::span<const double> d) {
  const std::size_t n = data.size();
  const std::size_t words = (n + 63) / 64;
  std::vector<double> radius(n, 0.0);
  std::vector<std::vector<std::uint64_t>> cover(n, std::vector<std::uint64_t>(words, 0));
  for (std::size_t i = 0; i < n; ++i) {
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (data.instance(j).label != data.instance(i).label) r = std::min(r, d[i * n + j]);
    }
    radius[i] = r;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || d[i * n + j] < r) cover[i][j / 64] |= std::uint64_t{1} << (j % 64);
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return radius[a] > radius[b]; });
  std::vector<std::size_t> kept;
  for (const auto j : order) {
    bool absorbed = false;
    for (const auto i : kept) {
      bool subset = true;
      for (std::size_t w = 0; w < words && subset; ++w) subset = (cover[j][w] & ~cover[i][w]) == 0;
      if (subset) {
        absorbed = true;
        break;
      }
    }
    if (!absorbed) kept.push_back(j);
  }
  return static_cast<double>(kept.size()) / static_cast<double>(n);
}

}  // namespace

ComplexityProfile complexity_measures(const Dataset& dataset) {
  std::vector<std::vector<std::size_t>> by_class(dataset.class_count());
  for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset.instance(i).label].push_back(i);
  std::vector<std::size_t> present;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (!by_class[c].empty()) present.push_back(c);
  }
  if (present.size() < 2) {
    throw DataError(DataErrorKind::degenerate,
                    "'" + dataset.name() + "': complexity measures need at least two classes present");
  }
  std::vector<std::size_t> numeric;
  for (std::size_t a = 0; a < dataset.attribute_count(); ++a) {
    if (dataset.attribute(a).is_numeric()) numeric.push_back(a);
  }

  ComplexityProfile p;
  std::size_t pairs = 0;
  for (std::size_t x = 0; x < present.size(); ++x) {
    for (std::size_t y = x + 1; y < present.size(); ++y) {
      const auto& a = by_class[present[x]];
      const auto& b = by_class[present[y]];
      p.f2 += pair_f2(dataset, a, b, numeric);
      p.f3 += pair_f3(dataset, a, b, numeric);
      p.f4 += pair_f4(dataset, a, b, numeric);
      ++pairs;
    }
  }
  p.f2 /= static_cast<double>(pairs);
  p.f3 /= static_cast<double>(pairs);
  p.f4 /= static_cast<double>(pairs);

  const auto metric = HeomMetric::fit(dataset);
  const auto d = distance_matrix(dataset, metric);
  p.n1 = mst_boundary_fraction(dataset, d);
  p.n2 = intra_inter_ratio(dataset, d);
  p.n3 = loo_one_nn_error(dataset);
  p.t1 = sphere_fraction(dataset, d);
  p.t2 = static_cast<double>(dataset.size()) / static_cast<double>(std::max<std::size_t>(1, dataset.attribute_count()));
  return p;
}

}  // namespace purgelab
