#include "purgelab/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "purgelab/random.hpp"

namespace purgelab {

NoisyDataset inject_label_noise(const Dataset& dataset, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw std::invalid_argument("noise rate must lie in [0, 1]");
  }
  const std::size_t n = dataset.size();
  const auto count = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  // Partial Fisher-Yates: the first `count` slots become the sample.
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
    std::swap(order[i], order[j]);
  }
  std::vector<std::size_t> corrupted(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(corrupted.begin(), corrupted.end());

  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = dataset.instance(i).label;
  const std::size_t classes = dataset.class_count();
  for (const std::size_t i : corrupted) {
    const auto draw = static_cast<std::size_t>(rng.uniform_index(classes - 1));
    labels[i] = draw < labels[i] ? draw : draw + 1;
  }
  return NoisyDataset{dataset.with_labels(labels), std::move(corrupted)};
}

Dataset make_blobs(const BlobOptions& options) {
  if (options.class_count < 2) throw std::invalid_argument("make_blobs: class_count must be >= 2");
  if (options.per_class < 1) throw std::invalid_argument("make_blobs: per_class must be >= 1");
  if (options.dimension < 1) throw std::invalid_argument("make_blobs: dimension must be >= 1");
  if (!(options.spread > 0.0) || !std::isfinite(options.spread)) {
    throw std::invalid_argument("make_blobs: spread must be positive");
  }
  std::vector<AttributeMeta> attributes;
  for (std::size_t d = 0; d < options.dimension; ++d) {
    attributes.push_back(AttributeMeta::numeric("x" + std::to_string(d)));
  }
  std::vector<std::string> classes;
  for (std::size_t c = 0; c < options.class_count; ++c) classes.push_back("c" + std::to_string(c));

  const double axis = 1.0 / std::sqrt(static_cast<double>(options.dimension));
  Rng rng(options.seed);
  std::vector<Instance> instances;
  instances.reserve(options.class_count * options.per_class);
  for (std::size_t c = 0; c < options.class_count; ++c) {
    const double centre = static_cast<double>(c) * axis;
    for (std::size_t i = 0; i < options.per_class; ++i) {
      Instance inst;
      inst.label = c;
      inst.values.resize(options.dimension);
      for (auto& v : inst.values) v = centre + options.spread * rng.normal();
      instances.push_back(std::move(inst));
    }
  }
  return Dataset("blobs-" + std::to_string(options.seed), std::move(attributes),
                 std::move(classes), std::move(instances));
}

}  // namespace purgelab
