#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "purgelab/error.hpp"
#include "purgelab/filters.hpp"
#include "purgelab/random.hpp"
#include "purgelab/synthetic.hpp"
#include "test_support.hpp"

using namespace purgelab;
using purgelab::testkit::numeric_dataset;
using purgelab::testkit::random_dataset;

namespace {

MisclassificationMatrix random_matrix(std::uint64_t seed, std::size_t learners, std::size_t n) {
  Rng rng(seed);
  std::vector<std::string> ids;
  for (std::size_t l = 0; l < learners; ++l) ids.push_back("l" + std::to_string(l));
  std::vector<std::uint8_t> flags(learners * n);
  for (auto& f : flags) f = rng.uniform01() < 0.3 ? 1 : 0;
  return MisclassificationMatrix(ids, n, flags);
}

Dataset noisy_blobs(std::uint64_t seed, std::size_t per_class = 40) {
  BlobOptions o;
  o.per_class = per_class;
  o.class_count = 2;
  o.spread = 0.4;
  o.seed = seed;
  return inject_label_noise(make_blobs(o), 0.2, seed).data;
}

}  // namespace

TEST(FlagMode, ParseAndPrint) {
  EXPECT_EQ(FlagMode::parse("all"), FlagMode::train_on_all());
  const auto cv = FlagMode::parse("cv:4", 7);
  EXPECT_EQ(cv.kind, FlagMode::Kind::cross_validated);
  EXPECT_EQ(cv.folds, 4u);
  EXPECT_EQ(cv.seed, 7u);
  EXPECT_EQ(cv.to_string(), "cv:4");
  EXPECT_THROW(FlagMode::parse("cv:1"), std::invalid_argument);
  EXPECT_THROW(FlagMode::parse("cv:x"), std::invalid_argument);
  EXPECT_THROW(FlagMode::parse("loo"), std::invalid_argument);
}

TEST(EnsembleFilter, RemovesAtOrAboveTheFraction) {
  // 5 learners; instance i misclassified by i of them
  std::vector<std::uint8_t> flags(5 * 6, 0);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t l = 0; l < i && l < 5; ++l) flags[l * 6 + i] = 1;
  }
  const MisclassificationMatrix m({"a", "b", "c", "d", "e"}, 6, flags);
  EXPECT_EQ(ensemble_filter(m, 0.5).removed, (std::vector<std::size_t>{3, 4, 5}));
  EXPECT_EQ(ensemble_filter(m, 0.6).removed, (std::vector<std::size_t>{3, 4, 5}));
  EXPECT_EQ(ensemble_filter(m, 0.7).removed, (std::vector<std::size_t>{4, 5}));
  EXPECT_EQ(ensemble_filter(m, 1.0).removed, (std::vector<std::size_t>{5}));
  EXPECT_EQ(ensemble_filter(m, 0.5).kept, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_THROW(ensemble_filter(m, 0.0), std::invalid_argument);
  EXPECT_THROW(ensemble_filter(m, 1.5), std::invalid_argument);
}

TEST(EnsembleFilter, MonotoneInThreshold) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = random_matrix(seed, 1 + seed % 9, 200);
    const auto r9 = ensemble_filter(m, 0.9).removed;
    const auto r7 = ensemble_filter(m, 0.7).removed;
    const auto r5 = ensemble_filter(m, 0.5).removed;
    EXPECT_TRUE(std::includes(r7.begin(), r7.end(), r9.begin(), r9.end()));
    EXPECT_TRUE(std::includes(r5.begin(), r5.end(), r7.begin(), r7.end()));
  }
}

TEST(Matrix, SelectLearnersKeepsRows) {
  const auto m = random_matrix(3, 4, 10);
  const std::vector<std::size_t> rows{2, 0};
  const auto s = m.select_learners(rows);
  EXPECT_EQ(s.learner_ids(), (std::vector<std::string>{"l2", "l0"}));
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(s.flagged(0, i), m.flagged(2, i));
    EXPECT_EQ(s.flagged(1, i), m.flagged(0, i));
  }
}

TEST(FlagMisclassified, RowsFollowSpecsAndMatchDirectFits) {
  const auto d = noisy_blobs(1);
  const auto specs = builtin_learners(3);
  const auto m = flag_misclassified(specs, d, FlagMode::train_on_all());
  ASSERT_EQ(m.learner_count(), 5u);
  for (std::size_t l = 0; l < specs.size(); ++l) {
    const auto model = fit(specs[l], d);
    for (std::size_t i = 0; i < d.size(); ++i) {
      EXPECT_EQ(m.flagged(l, i), model.predict(d.instance(i)) != d.instance(i).label);
    }
  }
  // parallel flags are identical
  EXPECT_EQ(m, flag_misclassified(specs, d, FlagMode::train_on_all(), 4));
}

TEST(FlagMisclassified, CrossValidatedUsesOutOfFoldPredictions) {
  const auto d = noisy_blobs(2);
  const LearnerSpec spec = LearnerSpec::parse("knn:k=1");
  const auto mode = FlagMode::cross_validated(5, 11);
  const auto m = flag_misclassified(std::span(&spec, 1), d, mode);
  const auto plan = stratified_folds(d, 5, 11);
  for (std::size_t f = 0; f < 5; ++f) {
    const auto model = fit(spec, d.subset(plan.train_indices(f)));
    for (const auto i : plan.test_indices(f)) {
      EXPECT_EQ(m.flagged(0, i), model.predict(d.instance(i)) != d.instance(i).label);
    }
  }
  // resubstitution 1-NN flags nothing on distinct points; CV flags the noise
  const auto resub = flag_misclassified(std::span(&spec, 1), d, FlagMode::train_on_all());
  EXPECT_EQ(ensemble_filter(resub, 1.0).removed.size(), 0u);
  EXPECT_GT(ensemble_filter(m, 1.0).removed.size(), 0u);
}

TEST(BiasedFilter, RemovesWhatTheLearnerMisses) {
  const auto d = noisy_blobs(3);
  const auto spec = LearnerSpec::parse("naive-bayes");
  const auto outcome = biased_filter(spec, d, FlagMode::train_on_all());
  const auto model = fit(spec, d);
  for (const auto i : outcome.removed) EXPECT_NE(model.predict(d.instance(i)), d.instance(i).label);
  for (const auto i : outcome.kept) EXPECT_EQ(model.predict(d.instance(i)), d.instance(i).label);
}

TEST(ApplyFilter, FallsBackWhenAClassVanishes) {
  const auto d = numeric_dataset({{0}, {1}, {2}, {3}}, {0, 0, 0, 1});
  FilterOutcome wipe{{0, 1, 2}, {3}, ""};
  const auto r = apply_filter(d, wipe);
  EXPECT_TRUE(r.fell_back);
  EXPECT_EQ(r.data, d);
  FilterOutcome tiny{{0}, {1, 2, 3}, ""};
  EXPECT_TRUE(apply_filter(d, tiny).fell_back);
  FilterOutcome fine{{0, 3}, {1, 2}, ""};
  const auto ok = apply_filter(d, fine);
  EXPECT_FALSE(ok.fell_back);
  EXPECT_EQ(ok.data.size(), 2u);
  FilterOutcome broken{{0}, {1}, ""};
  EXPECT_THROW(apply_filter(d, broken), std::invalid_argument);
}

TEST(Holdout, StratifiedDisjointAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto d = random_dataset(seed, 50, 2, 0, 3);
    const auto s = stratified_holdout(d, 0.2, seed);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (const auto i : s.validation) EXPECT_TRUE(all.insert(i).second);
    EXPECT_EQ(all.size(), d.size());
    const auto counts = d.class_counts();
    for (std::size_t c = 0; c < d.class_count(); ++c) {
      std::size_t in_val = 0;
      for (const auto i : s.validation) in_val += d.instance(i).label == c;
      if (counts[c] >= 2) {
        EXPECT_GE(in_val, 1u);
        EXPECT_LT(in_val, counts[c]);
      }
      EXPECT_LE(static_cast<double>(in_val), 0.2 * static_cast<double>(counts[c]) + 1.0);
    }
    const auto again = stratified_holdout(d, 0.2, seed);
    EXPECT_EQ(again.train, s.train);
    EXPECT_EQ(again.validation, s.validation);
  }
  EXPECT_THROW(stratified_holdout(random_dataset(1, 20, 1, 0, 2), 1.0, 0), std::invalid_argument);
}

TEST(Holdout, GivesUpOnHopelessSplits) {
  // a tiny fraction can never place a validation member of each class
  const auto d = random_dataset(2, 40, 1, 0, 2);
  EXPECT_THROW(
      {
        try {
          stratified_holdout(d, 1e-6, 0);
        } catch (const DataError& e) {
          EXPECT_EQ(e.kind(), DataErrorKind::degenerate);
          throw;
        }
      },
      DataError);
}

TEST(Adaptive, TraceContract) {
  const auto candidates = builtin_learners(0);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto d = noisy_blobs(seed, 30);
    AdaptiveOptions o;
    o.seed = seed;
    o.mode = FlagMode::cross_validated(3, seed);
    const auto target = LearnerSpec::parse("knn:k=1");
    const auto trace = adaptive_filter(candidates, target, d, o);
    ASSERT_EQ(trace.accuracies.size(), trace.chosen.size() + 1);
    EXPECT_LE(trace.chosen.size(), candidates.size());
    for (std::size_t k = 1; k < trace.accuracies.size(); ++k) {
      EXPECT_GT(trace.accuracies[k], trace.accuracies[k - 1]);
    }
    std::set<std::size_t> unique(trace.chosen.begin(), trace.chosen.end());
    EXPECT_EQ(unique.size(), trace.chosen.size());
    const auto split = stratified_holdout(d, o.validation_fraction, trace.split_seed);
    const double baseline = accuracy(fit(target, d.subset(split.train)), d.subset(split.validation));
    EXPECT_EQ(trace.accuracies[0], baseline);
    const auto outcome = adaptive_outcome(trace, candidates, d, o);
    EXPECT_EQ(outcome.kept.size() + outcome.removed.size(), d.size());
    if (trace.chosen.empty()) EXPECT_TRUE(outcome.removed.empty());
  }
}

TEST(SelectBestThreshold, EvaluatesEveryThresholdAndPrefersLargerOnTies) {
  const auto d = numeric_dataset({{0}, {1}, {2}, {3}, {10}, {11}, {12}, {13}}, {0, 0, 0, 0, 1, 1, 1, 1});
  // nobody misclassifies anything: every threshold gives the same accuracy
  const MisclassificationMatrix m({"a", "b"}, 8, std::vector<std::uint8_t>(16, 0));
  const std::vector<double> ts{0.5, 0.7, 0.9};
  const auto sel = select_best_threshold(m, ts, LearnerSpec::parse("knn:k=1"), d, CvProtocol{1, 2, 3});
  EXPECT_EQ(sel.threshold, 0.9);
  EXPECT_EQ(sel.evaluated.size(), 3u);
  EXPECT_DOUBLE_EQ(sel.accuracy, 1.0);
}
