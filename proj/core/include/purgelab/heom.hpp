#pragma once

#include <optional>
#include <span>
#include <vector>

#include "purgelab/dataset.hpp"

namespace purgelab {

/// Heterogeneous Euclidean-overlap metric.
///
/// Per attribute: 1 if either cell is missing; 0/1 overlap for categorical
/// cells; |x - y| / range for numeric cells. A zero-width or undefined range
/// degrades to 0/1 overlap on the raw values. The distance is the Euclidean
/// norm of the per-attribute terms.
class HeomMetric {
 public:
  HeomMetric(std::vector<AttributeKind> kinds, std::vector<std::optional<NumericRange>> ranges);

  /// Ranges taken from the dataset via min_max_ranges.
  static HeomMetric fit(const Dataset& dataset);

  double attribute_distance(std::size_t attribute, double x, double y) const;
  double distance(std::span<const double> a, std::span<const double> b) const;
  double distance(const Instance& a, const Instance& b) const {
    return distance(a.values, b.values);
  }

 private:
  std::vector<AttributeKind> kinds_;
  std::vector<std::optional<NumericRange>> ranges_;
};

}  // namespace purgelab
