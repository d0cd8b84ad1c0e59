#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "purgelab/learners.hpp"
#include "purgelab/random.hpp"

namespace purgelab {

namespace {

using Node = DecisionTreeModel::Node;

constexpr double kGainEpsilon = 1e-10;

double entropy(std::span<const double> counts, double total) {
  if (total <= 0) return 0.0;
  double h = 0.0;
  for (const double c : counts) {
    if (c > 0) {
      const double p = c / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

double split_information(std::span<const double> branch_sizes, double total) {
  double info = 0.0;
  for (const double s : branch_sizes) {
    if (s > 0) {
      const double p = s / total;
      info -= p * std::log2(p);
    }
  }
  return info;
}

ClassDistribution normalized(const std::vector<double>& counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  ClassDistribution out(counts.size(), 0.0);
  if (total > 0) {
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] / total;
  }
  return out;
}

struct TreeConfig {
  bool prune = true;
  std::size_t min_leaf = 2;
  std::size_t max_depth = 0;
  double prune_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct SplitCandidate {
  std::size_t attribute = 0;
  double threshold = 0.0;
  double gain = 0.0;
  double ratio = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TreeConfig& config)
      : data_(data), config_(config), classes_(data.class_count()) {}

  std::vector<Node> grow(std::vector<std::size_t> rows) {
    nodes_.clear();
    build(std::move(rows), 0);
    return std::move(nodes_);
  }

 private:
  std::vector<double> class_counts(const std::vector<std::size_t>& rows) const {
    std::vector<double> counts(classes_, 0.0);
    for (const auto r : rows) counts[data_.instance(r).label] += 1.0;
    return counts;
  }

  std::optional<SplitCandidate> evaluate_numeric(std::size_t a, const std::vector<std::size_t>& rows) const {
    std::vector<std::pair<double, std::size_t>> known;
    for (const auto r : rows) {
      const double v = data_.instance(r).values[a];
      if (!is_missing(v)) known.emplace_back(v, data_.instance(r).label);
    }
    const double n = static_cast<double>(rows.size());
    const double known_n = static_cast<double>(known.size());
    if (known.size() < 2 * config_.min_leaf) return std::nullopt;
    std::stable_sort(known.begin(), known.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<double> right(classes_, 0.0), left(classes_, 0.0);
    for (const auto& [v, label] : known) right[label] += 1.0;
    const double base = entropy(right, known_n);

    double best_gain = -1.0;
    double best_threshold = 0.0;
    double best_left = 0.0;
    for (std::size_t i = 0; i + 1 < known.size(); ++i) {
      left[known[i].second] += 1.0;
      right[known[i].second] -= 1.0;
      const double left_n = static_cast<double>(i + 1);
      const double right_n = known_n - left_n;
      if (known[i].first >= known[i + 1].first) continue;
      if (i + 1 < config_.min_leaf || known.size() - (i + 1) < config_.min_leaf) continue;
      const double gain =
          base - (left_n / known_n) * entropy(left, left_n) - (right_n / known_n) * entropy(right, right_n);
      if (gain > best_gain) {
        best_gain = gain;
        const double lo = known[i].first;
        const double hi = known[i + 1].first;
        best_threshold = lo + (hi - lo) / 2.0;
        if (!(best_threshold < hi)) best_threshold = lo;
        best_left = left_n;
      }
    }
    if (best_gain < 0) return std::nullopt;
    const double gain = best_gain * known_n / n;
    const double branches[3] = {best_left, known_n - best_left, n - known_n};
    const double info = split_information(branches, n);
    if (gain <= kGainEpsilon || info <= kGainEpsilon) return std::nullopt;
    return SplitCandidate{a, best_threshold, gain, gain / info};
  }

  std::optional<SplitCandidate> evaluate_categorical(std::size_t a, const std::vector<std::size_t>& rows) const {
    const std::size_t values = data_.attribute(a).values.size();
    std::vector<std::vector<double>> counts(values, std::vector<double>(classes_, 0.0));
    std::vector<double> sizes(values + 1, 0.0);
    std::vector<double> total(classes_, 0.0);
    double known_n = 0.0;
    for (const auto r : rows) {
      const auto& inst = data_.instance(r);
      const double v = inst.values[a];
      if (is_missing(v)) {
        sizes[values] += 1.0;
        continue;
      }
      const auto vi = static_cast<std::size_t>(v);
      counts[vi][inst.label] += 1.0;
      sizes[vi] += 1.0;
      total[inst.label] += 1.0;
      known_n += 1.0;
    }
    std::size_t viable = 0;
    for (std::size_t v = 0; v < values; ++v) {
      if (sizes[v] >= static_cast<double>(config_.min_leaf)) ++viable;
    }
    if (viable < 2) return std::nullopt;
    double gain = entropy(total, known_n);
    for (std::size_t v = 0; v < values; ++v) gain -= (sizes[v] / known_n) * entropy(counts[v], sizes[v]);
    const double n = static_cast<double>(rows.size());
    gain *= known_n / n;
    const double info = split_information(sizes, n);
    if (gain <= kGainEpsilon || info <= kGainEpsilon) return std::nullopt;
    return SplitCandidate{a, 0.0, gain, gain / info};
  }

  // C4.5 selection: best gain ratio among candidates whose gain is at least
  // the average gain. Ties go to the lowest attribute index.
  std::optional<SplitCandidate> choose(const std::vector<std::size_t>& rows) const {
    std::vector<SplitCandidate> candidates;
    for (std::size_t a = 0; a < data_.attribute_count(); ++a) {
      const auto c = data_.attribute(a).is_numeric() ? evaluate_numeric(a, rows)
                                                     : evaluate_categorical(a, rows);
      if (c) candidates.push_back(*c);
    }
    if (candidates.empty()) return std::nullopt;
    double mean_gain = 0.0;
    for (const auto& c : candidates) mean_gain += c.gain;
    mean_gain /= static_cast<double>(candidates.size());
    std::optional<SplitCandidate> best;
    for (const auto& c : candidates) {
      if (c.gain < mean_gain - 1e-12) continue;
      if (!best || c.ratio > best->ratio) best = c;
    }
    return best;
  }

  std::size_t build(std::vector<std::size_t> rows, std::size_t depth) {
    const std::size_t id = nodes_.size();
    nodes_.emplace_back();
    auto counts = class_counts(rows);
    nodes_[id].depth = depth;
    nodes_[id].prediction = normalized(counts);
    nodes_[id].class_counts = counts;

    const auto nonzero = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; });
    if (nonzero <= 1 || rows.size() < 2 * config_.min_leaf ||
        (config_.max_depth > 0 && depth >= config_.max_depth)) {
      return id;
    }
    const auto split = choose(rows);
    if (!split) return id;

    const AttributeMeta& meta = data_.attribute(split->attribute);
    const std::size_t branches = meta.is_numeric() ? 2 : meta.values.size();
    std::vector<std::vector<std::size_t>> parts(branches);
    std::vector<std::size_t> missing;
    for (const auto r : rows) {
      const double v = data_.instance(r).values[split->attribute];
      if (is_missing(v)) {
        missing.push_back(r);
      } else if (meta.is_numeric()) {
        parts[v <= split->threshold ? 0 : 1].push_back(r);
      } else {
        parts[static_cast<std::size_t>(v)].push_back(r);
      }
    }
    std::size_t majority = 0;
    for (std::size_t b = 1; b < branches; ++b) {
      if (parts[b].size() > parts[majority].size()) majority = b;
    }
    parts[majority].insert(parts[majority].end(), missing.begin(), missing.end());

    const ClassDistribution parent_prediction = nodes_[id].prediction;
    std::vector<std::size_t> children;
    for (auto& part : parts) {
      if (part.empty()) {
        const std::size_t leaf = nodes_.size();
        nodes_.emplace_back();
        nodes_[leaf].depth = depth + 1;
        nodes_[leaf].class_counts.assign(classes_, 0.0);
        nodes_[leaf].prediction = parent_prediction;
        children.push_back(leaf);
      } else {
        children.push_back(build(std::move(part), depth + 1));
      }
    }
    Node& node = nodes_[id];
    node.is_leaf = false;
    node.attribute = split->attribute;
    node.threshold = split->threshold;
    node.children = std::move(children);
    node.missing_child = majority;
    return id;
  }

  const Dataset& data_;
  TreeConfig config_;
  std::size_t classes_;
  std::vector<Node> nodes_;
};

std::size_t branch_of(const Node& node, const std::vector<AttributeKind>& kinds, const Instance& inst) {
  const double v = inst.values[node.attribute];
  if (is_missing(v)) return node.missing_child;
  if (kinds[node.attribute] == AttributeKind::numeric) return v <= node.threshold ? 0 : 1;
  return static_cast<std::size_t>(v);
}

// Reduced-error pruning, bottom-up. Returns prune-set errors of the subtree.
std::size_t prune(std::vector<Node>& nodes, std::size_t id, const std::vector<AttributeKind>& kinds,
                  const Dataset& data, const std::vector<std::size_t>& rows) {
  const std::size_t predicted = argmax_lowest(nodes[id].prediction);
  std::size_t leaf_errors = 0;
  for (const auto r : rows) {
    if (data.instance(r).label != predicted) ++leaf_errors;
  }
  if (nodes[id].is_leaf) return leaf_errors;
  std::vector<std::vector<std::size_t>> parts(nodes[id].children.size());
  for (const auto r : rows) parts[branch_of(nodes[id], kinds, data.instance(r))].push_back(r);
  std::size_t subtree_errors = 0;
  for (std::size_t b = 0; b < parts.size(); ++b) {
    subtree_errors += prune(nodes, nodes[id].children[b], kinds, data, parts[b]);
  }
  if (leaf_errors <= subtree_errors) {
    nodes[id].is_leaf = true;
    nodes[id].children.clear();
    return leaf_errors;
  }
  return subtree_errors;
}

// Copies the reachable part of the tree in preorder.
void compact(const std::vector<Node>& in, std::size_t id, std::vector<Node>& out) {
  const std::size_t slot = out.size();
  out.push_back(in[id]);
  if (in[id].is_leaf) return;
  std::vector<std::size_t> children;
  for (const auto c : in[id].children) {
    children.push_back(out.size());
    compact(in, c, out);
  }
  out[slot].children = std::move(children);
}

class DecisionTreeLearner : public Learner {
 public:
  explicit DecisionTreeLearner(TreeConfig config) : config_(config) {}

  std::unique_ptr<Model> fit(const Dataset& train) const override {
    std::vector<AttributeKind> kinds;
    for (const auto& a : train.attributes()) kinds.push_back(a.kind);

    std::vector<std::size_t> all(train.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> grow_rows = all;
    std::vector<std::size_t> prune_rows;
    if (config_.prune) {
      const auto prune_n = static_cast<std::size_t>(
          std::llround(config_.prune_fraction * static_cast<double>(train.size())));
      if (prune_n > 0 && train.size() - prune_n >= 2) {
        std::vector<std::size_t> order = all;
        Rng rng(config_.seed);
        rng.shuffle(std::span<std::size_t>(order));
        prune_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(prune_n));
        grow_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(prune_n), order.end());
        std::sort(prune_rows.begin(), prune_rows.end());
        std::sort(grow_rows.begin(), grow_rows.end());
      }
    }

    TreeBuilder builder(train, config_);
    std::vector<Node> nodes = builder.grow(grow_rows);
    if (!prune_rows.empty()) prune(nodes, 0, kinds, train, prune_rows);
    std::vector<Node> tree;
    compact(nodes, 0, tree);

    // Backfit: counts over the full training set; empty nodes inherit the
    // parent's prediction.
    for (auto& node : tree) node.class_counts.assign(train.class_count(), 0.0);
    for (const auto& inst : train.instances()) {
      std::size_t id = 0;
      while (true) {
        tree[id].class_counts[inst.label] += 1.0;
        if (tree[id].is_leaf) break;
        id = tree[id].children[branch_of(tree[id], kinds, inst)];
      }
    }
    for (std::size_t id = 0; id < tree.size(); ++id) {
      const double total = std::accumulate(tree[id].class_counts.begin(), tree[id].class_counts.end(), 0.0);
      if (total > 0) tree[id].prediction = normalized(tree[id].class_counts);
      for (const auto c : tree[id].children) tree[c].prediction = tree[id].prediction;
    }
    return std::make_unique<DecisionTreeModel>(std::move(tree), std::move(kinds));
  }

 private:
  TreeConfig config_;
};

}  // namespace

double TreeLeaf::coverage() const {
  return std::accumulate(class_counts.begin(), class_counts.end(), 0.0);
}

DecisionTreeModel::DecisionTreeModel(std::vector<Node> nodes, std::vector<AttributeKind> kinds)
    : nodes_(std::move(nodes)), kinds_(std::move(kinds)) {
  std::size_t next_leaf = 0;
  for (auto& node : nodes_) {
    if (node.is_leaf) node.leaf_id = next_leaf++;
  }
  leaf_count_ = next_leaf;
}

std::size_t DecisionTreeModel::route(const Instance& instance) const {
  std::size_t id = 0;
  while (!nodes_[id].is_leaf) id = nodes_[id].children[branch_of(nodes_[id], kinds_, instance)];
  return id;
}

ClassDistribution DecisionTreeModel::distribution(const Instance& instance) const {
  return nodes_[route(instance)].prediction;
}

TreeLeaf DecisionTreeModel::leaf_for(const Instance& instance) const {
  const Node& node = nodes_[route(instance)];
  return TreeLeaf{node.leaf_id, node.depth, node.class_counts};
}

double DecisionTreeModel::largest_leaf_coverage() const {
  double best = 0.0;
  for (const auto& node : nodes_) {
    if (!node.is_leaf) continue;
    best = std::max(best, std::accumulate(node.class_counts.begin(), node.class_counts.end(), 0.0));
  }
  return best;
}

std::unique_ptr<Learner> make_decision_tree(const LearnerSpec& spec) {
  TreeConfig config;
  const std::string pruning = hyper::get_text(spec, "pruning", "rep");
  if (pruning == "rep") {
    config.prune = true;
  } else if (pruning == "none") {
    config.prune = false;
  } else {
    throw std::invalid_argument("decision-tree: pruning must be 'rep' or 'none'");
  }
  const long long min_leaf = hyper::get_int(spec, "min_leaf", 2);
  const long long max_depth = hyper::get_int(spec, "max_depth", 0);
  config.prune_fraction = hyper::get_real(spec, "prune_fraction", 0.2);
  if (min_leaf < 1) throw std::invalid_argument("decision-tree: min_leaf must be >= 1");
  if (max_depth < 0) throw std::invalid_argument("decision-tree: max_depth must be >= 0");
  if (!(config.prune_fraction > 0.0 && config.prune_fraction < 1.0)) {
    throw std::invalid_argument("decision-tree: prune_fraction must lie in (0, 1)");
  }
  config.min_leaf = static_cast<std::size_t>(min_leaf);
  config.max_depth = static_cast<std::size_t>(max_depth);
  config.seed = spec.seed;
  return std::make_unique<DecisionTreeLearner>(config);
}

}  // namespace purgelab
