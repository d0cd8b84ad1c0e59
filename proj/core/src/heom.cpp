#include "purgelab/heom.hpp"

#include <cmath>
#include <stdexcept>

namespace purgelab {

HeomMetric::HeomMetric(std::vector<AttributeKind> kinds,
                       std::vector<std::optional<NumericRange>> ranges)
    : kinds_(std::move(kinds)), ranges_(std::move(ranges)) {
  if (kinds_.size() != ranges_.size()) {
    throw std::invalid_argument("HeomMetric: kinds and ranges differ in length");
  }
}

HeomMetric HeomMetric::fit(const Dataset& dataset) {
  std::vector<AttributeKind> kinds;
  for (const auto& a : dataset.attributes()) kinds.push_back(a.kind);
  return HeomMetric(std::move(kinds), min_max_ranges(dataset));
}

double HeomMetric::attribute_distance(std::size_t attribute, double x, double y) const {
  if (is_missing(x) || is_missing(y)) return 1.0;
  if (kinds_[attribute] == AttributeKind::categorical) return x == y ? 0.0 : 1.0;
  const auto& range = ranges_[attribute];
  if (!range || range->width() <= 0.0) return x == y ? 0.0 : 1.0;
  return std::abs(x - y) / range->width();
}

double HeomMetric::distance(std::span<const double> a, std::span<const double> b) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < kinds_.size(); ++i) {
    const double d = attribute_distance(i, a[i], b[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace purgelab
