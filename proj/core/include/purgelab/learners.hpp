#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "purgelab/learner.hpp"

namespace purgelab {

// Built-in learners. Each factory validates its own hyperparameters.
//
//  decision-tree  pruning=rep|none (rep), min_leaf (2), max_depth (0 = unbounded),
//                 prune_fraction (0.2)
//  knn            k (5)
//  naive-bayes    (none)
//  mlp            hidden (16), epochs (200), rate (0.1)
//  one-rule       min_bucket (6)

std::unique_ptr<Learner> make_decision_tree(const LearnerSpec& spec);
std::unique_ptr<Learner> make_knn(const LearnerSpec& spec);
std::unique_ptr<Learner> make_naive_bayes(const LearnerSpec& spec);
std::unique_ptr<Learner> make_mlp(const LearnerSpec& spec);
std::unique_ptr<Learner> make_one_rule(const LearnerSpec& spec);

/// Leaf of a fitted decision tree. Coverage and class counts are over the
/// full training set routed through the final (possibly pruned) tree.
struct TreeLeaf {
  std::size_t id = 0;
  std::size_t depth = 0;
  std::vector<double> class_counts;

  double coverage() const;
};

/// Fitted decision tree; exposes leaf metadata for the hardness measures.
class DecisionTreeModel : public Model {
 public:
  struct Node {
    bool is_leaf = true;
    std::size_t attribute = 0;
    double threshold = 0.0;             // numeric: left branch iff value <= threshold
    std::vector<std::size_t> children;  // numeric: {<=, >}; categorical: one per value
    std::size_t missing_child = 0;      // branch taken by missing cells
    std::size_t depth = 0;
    std::vector<double> class_counts;   // training instances reaching the node
    ClassDistribution prediction;
    std::size_t leaf_id = 0;
  };

  DecisionTreeModel(std::vector<Node> nodes, std::vector<AttributeKind> kinds);

  ClassDistribution distribution(const Instance& instance) const override;

  TreeLeaf leaf_for(const Instance& instance) const;
  std::size_t leaf_count() const noexcept { return leaf_count_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  /// Largest leaf coverage; the normaliser of the disjunct-size measure.
  double largest_leaf_coverage() const;

 private:
  std::size_t route(const Instance& instance) const;

  std::vector<Node> nodes_;
  std::vector<AttributeKind> kinds_;
  std::size_t leaf_count_ = 0;
};

}  // namespace purgelab
