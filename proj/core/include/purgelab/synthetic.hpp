#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "purgelab/dataset.hpp"

namespace purgelab {

struct NoisyDataset {
  Dataset data;
  /// Sorted indices whose label was changed.
  std::vector<std::size_t> corrupted;
};

/// Corrupts exactly round(rate * n) distinct instances, chosen uniformly by
/// seed; each receives a label drawn uniformly from the other classes.
NoisyDataset inject_label_noise(const Dataset& dataset, double rate, std::uint64_t seed);

struct BlobOptions {
  std::size_t class_count = 2;
  std::size_t per_class = 50;
  std::size_t dimension = 2;
  double spread = 0.5;
  std::uint64_t seed = 0;
};

/// Isotropic Gaussian classes. Class c is centred at c * u with u the unit
/// diagonal (1, ..., 1) / sqrt(dimension), so neighbouring class means are
/// exactly one unit apart; spread is the per-coordinate standard deviation.
/// Instances are emitted class by class.
Dataset make_blobs(const BlobOptions& options);

}  // namespace purgelab
