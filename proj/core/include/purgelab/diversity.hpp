#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "purgelab/dataset.hpp"
#include "purgelab/learner.hpp"

namespace purgelab {

/// Classifier output difference between learners; symmetric, zero diagonal.
class CodMatrix {
 public:
  CodMatrix(std::vector<std::string> ids, std::vector<double> distances);

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::size_t size() const noexcept { return ids_.size(); }
  double at(std::size_t a, std::size_t b) const { return distances_[a * ids_.size() + b]; }

 private:
  std::vector<std::string> ids_;
  std::vector<double> distances_;
};

/// Fraction of positions where the two prediction sequences differ.
double cod_pair(std::span<const std::size_t> a, std::span<const std::size_t> b);

/// Per dataset and repeat, all learners share one stratified fold plan; COD
/// is taken on out-of-fold predictions, averaged over repeats, then over
/// datasets.
CodMatrix cod_matrix(std::span<const LearnerSpec> specs, std::span<const Dataset> datasets,
                     const CvProtocol& protocol, std::size_t jobs = 1);

/// Average-linkage (UPGMA) dendrogram. Leaves are clusters 0..n-1; the
/// cluster formed by merge m gets id n + m.
struct Dendrogram {
  struct Merge {
    std::size_t a = 0;
    std::size_t b = 0;
    double height = 0.0;
    std::size_t size = 0;
  };

  std::vector<std::string> leaves;
  std::vector<Merge> merges;

  /// Leaves under a cluster id, ascending.
  std::vector<std::size_t> members(std::size_t cluster) const;
};

/// Merges the closest pair each step. Equal distances go to the pair whose
/// (smallest leaf, smallest leaf) key is lexicographically lowest.
Dendrogram agglomerate(const CodMatrix& matrix);

/// Leaf groups joined by merges strictly below the height, each ascending,
/// ordered by first leaf.
std::vector<std::vector<std::size_t>> cut(const Dendrogram& dendrogram, double height);

/// Medoid of each cluster (smallest summed COD to the other members, ties
/// to the lowest leaf).
std::vector<std::size_t> representatives(const std::vector<std::vector<std::size_t>>& partition,
                                         const CodMatrix& matrix);

/// Indented text rendering; inner nodes show height and size.
std::string dendrogram_text(const Dendrogram& dendrogram);

/// "leaf_a,leaf_b,height" rows, one per merge; each side is named by its
/// lowest leaf.
std::string dendrogram_csv(const Dendrogram& dendrogram);

}  // namespace purgelab
