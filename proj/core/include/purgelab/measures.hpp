#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "purgelab/dataset.hpp"
#include "purgelab/learner.hpp"

namespace purgelab {

/// Per instance: mean over CV repeats of the fraction of learners whose
/// out-of-fold prediction differs from the observed label.
std::vector<double> instance_hardness(const Dataset& dataset, std::span<const LearnerSpec> specs,
                                      const CvProtocol& protocol, std::size_t jobs = 1);

struct NoisyReport {
  std::vector<std::size_t> indices;
  /// 100 * indices / instances.
  double percent = 0.0;
};

/// Instances with hardness strictly above the cutoff.
NoisyReport noisy_instances(std::span<const double> hardness, double cutoff = 0.9);

struct HardnessProfile {
  std::vector<double> kdn;  // k-disagreeing neighbours
  std::vector<double> ds;   // disjunct size, unpruned tree
  std::vector<double> dcp;  // disjunct class percentage, pruned tree
  std::vector<double> td;   // leaf depth, pruned tree
  std::vector<double> cl;   // class likelihood
  std::vector<double> cld;  // class likelihood difference
  std::vector<double> mv;   // own-class count / majority-class count
  std::vector<double> cb;   // own-class share - 1 / classes
};

/// kDN alone. Requires 1 <= k < n.
std::vector<double> k_disagreeing_neighbors(const Dataset& dataset, std::size_t k);

/// The seed drives the pruned tree's prune-set draw.
HardnessProfile hardness_measures(const Dataset& dataset, std::size_t k = 5, std::uint64_t seed = 0);

struct ComplexityProfile {
  double f2 = 0.0;
  double f3 = 0.0;
  double f4 = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
  double n3 = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
};

/// F2-F4 average one-vs-one over present class pairs and use numeric
/// attributes only; the distance-based measures use HEOM. Throws
/// DataError(degenerate) when fewer than two classes are present.
ComplexityProfile complexity_measures(const Dataset& dataset);

}  // namespace purgelab
