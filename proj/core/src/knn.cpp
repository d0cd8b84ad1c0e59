#include <algorithm>
#include <stdexcept>

#include "purgelab/heom.hpp"
#include "purgelab/learners.hpp"

namespace purgelab {

namespace {

class KnnModel : public Model {
 public:
  KnnModel(std::size_t k, const Dataset& train)
      : k_(k), metric_(HeomMetric::fit(train)), classes_(train.class_count()) {
    points_.reserve(train.size());
    for (const auto& inst : train.instances()) points_.push_back(inst);
  }

  ClassDistribution distribution(const Instance& query) const override {
    // Neighbour order is (distance, label): independent of training order.
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(points_.size());
    for (const auto& p : points_) scored.emplace_back(metric_.distance(query, p), p.label);
    const std::size_t k = std::min(k_, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end());
    ClassDistribution votes(classes_, 0.0);
    for (std::size_t i = 0; i < k; ++i) votes[scored[i].second] += 1.0;
    for (auto& v : votes) v /= static_cast<double>(k);
    return votes;
  }

 private:
  std::size_t k_;
  HeomMetric metric_;
  std::size_t classes_;
  std::vector<Instance> points_;
};

class KnnLearner : public Learner {
 public:
  explicit KnnLearner(std::size_t k) : k_(k) {}

  std::unique_ptr<Model> fit(const Dataset& train) const override {
    return std::make_unique<KnnModel>(k_, train);
  }

 private:
  std::size_t k_;
};

}  // namespace

std::unique_ptr<Learner> make_knn(const LearnerSpec& spec) {
  const long long k = hyper::get_int(spec, "k", 5);
  if (k < 1) throw std::invalid_argument("knn: k must be at least 1");
  return std::make_unique<KnnLearner>(static_cast<std::size_t>(k));
}

}  // namespace purgelab
