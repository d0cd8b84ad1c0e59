#include <cmath>
#include <limits>
#include <numbers>

#include "purgelab/learners.hpp"

namespace purgelab {

namespace {

constexpr double kVarianceFloor = 1e-9;

struct Gaussian {
  double mean = 0.0;
  double variance = 1.0;
  bool usable = false;
};

// Priors are unsmoothed class frequencies; classes absent from training get
// probability zero. Categorical likelihoods use add-one smoothing over the
// attribute's value list; numeric ones a Gaussian with the MLE variance,
// floored. Missing cells are skipped. A class with no known values for a
// numeric attribute falls back to the pooled Gaussian of that attribute.
class NaiveBayesModel : public Model {
 public:
  explicit NaiveBayesModel(const Dataset& train)
      : kinds_(), classes_(train.class_count()) {
    const std::size_t attrs = train.attribute_count();
    const auto counts = train.class_counts();
    log_prior_.resize(classes_);
    for (std::size_t c = 0; c < classes_; ++c) {
      log_prior_[c] = counts[c] == 0
                          ? -std::numeric_limits<double>::infinity()
                          : std::log(static_cast<double>(counts[c]) / static_cast<double>(train.size()));
    }
    for (const auto& a : train.attributes()) kinds_.push_back(a.kind);
    gaussians_.assign(attrs, std::vector<Gaussian>(classes_));
    log_tables_.assign(attrs, {});

    for (std::size_t a = 0; a < attrs; ++a) {
      const AttributeMeta& meta = train.attribute(a);
      if (meta.is_categorical()) {
        const std::size_t values = meta.values.size();
        std::vector<std::vector<double>> tally(classes_, std::vector<double>(values, 0.0));
        std::vector<double> known(classes_, 0.0);
        for (const auto& inst : train.instances()) {
          const double v = inst.values[a];
          if (is_missing(v)) continue;
          tally[inst.label][static_cast<std::size_t>(v)] += 1.0;
          known[inst.label] += 1.0;
        }
        auto& table = log_tables_[a];
        table.assign(classes_, std::vector<double>(values, 0.0));
        for (std::size_t c = 0; c < classes_; ++c) {
          for (std::size_t v = 0; v < values; ++v) {
            table[c][v] = std::log((tally[c][v] + 1.0) / (known[c] + static_cast<double>(values)));
          }
        }
        continue;
      }
      std::vector<double> sum(classes_, 0.0), sum_sq(classes_, 0.0), n(classes_, 0.0);
      double pooled_sum = 0.0, pooled_sq = 0.0, pooled_n = 0.0;
      for (const auto& inst : train.instances()) {
        const double v = inst.values[a];
        if (is_missing(v)) continue;
        sum[inst.label] += v;
        n[inst.label] += 1.0;
        pooled_sum += v;
        pooled_n += 1.0;
      }
      std::vector<double> mean(classes_, 0.0);
      for (std::size_t c = 0; c < classes_; ++c) {
        if (n[c] > 0) mean[c] = sum[c] / n[c];
      }
      const double pooled_mean = pooled_n > 0 ? pooled_sum / pooled_n : 0.0;
      for (const auto& inst : train.instances()) {
        const double v = inst.values[a];
        if (is_missing(v)) continue;
        sum_sq[inst.label] += (v - mean[inst.label]) * (v - mean[inst.label]);
        pooled_sq += (v - pooled_mean) * (v - pooled_mean);
      }
      for (std::size_t c = 0; c < classes_; ++c) {
        Gaussian& g = gaussians_[a][c];
        if (n[c] > 0) {
          g = {mean[c], std::max(sum_sq[c] / n[c], kVarianceFloor), true};
        } else if (pooled_n > 0) {
          g = {pooled_mean, std::max(pooled_sq / pooled_n, kVarianceFloor), true};
        }
      }
    }
  }

  ClassDistribution distribution(const Instance& instance) const override {
    std::vector<double> log_post = log_prior_;
    for (std::size_t a = 0; a < kinds_.size(); ++a) {
      const double v = instance.values[a];
      if (is_missing(v)) continue;
      for (std::size_t c = 0; c < classes_; ++c) {
        if (std::isinf(log_post[c])) continue;
        if (kinds_[a] == AttributeKind::categorical) {
          log_post[c] += log_tables_[a][c][static_cast<std::size_t>(v)];
        } else {
          const Gaussian& g = gaussians_[a][c];
          if (!g.usable) continue;
          const double diff = v - g.mean;
          log_post[c] += -0.5 * std::log(2.0 * std::numbers::pi * g.variance) -
                         diff * diff / (2.0 * g.variance);
        }
      }
    }
    double top = -std::numeric_limits<double>::infinity();
    for (const double lp : log_post) top = std::max(top, lp);
    ClassDistribution dist(classes_, 0.0);
    double total = 0.0;
    for (std::size_t c = 0; c < classes_; ++c) {
      if (std::isinf(log_post[c])) continue;
      dist[c] = std::exp(log_post[c] - top);
      total += dist[c];
    }
    for (auto& p : dist) p /= total;
    return dist;
  }

 private:
  std::vector<AttributeKind> kinds_;
  std::size_t classes_;
  std::vector<double> log_prior_;
  std::vector<std::vector<Gaussian>> gaussians_;
  std::vector<std::vector<std::vector<double>>> log_tables_;
};

class NaiveBayesLearner : public Learner {
 public:
  std::unique_ptr<Model> fit(const Dataset& train) const override {
    return std::make_unique<NaiveBayesModel>(train);
  }
};

}  // namespace

std::unique_ptr<Learner> make_naive_bayes(const LearnerSpec&) {
  return std::make_unique<NaiveBayesLearner>();
}

}  // namespace purgelab
