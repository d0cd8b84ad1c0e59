#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "purgelab/evalstats.hpp"
#include "purgelab/random.hpp"
#include "purgelab/synthetic.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace purgelab;
using purgelab::testkit::brute_force_p;
using purgelab::testkit::numeric_dataset;

namespace {

Cell cell(const std::string& dataset, const std::string& learner, const std::string& condition, double acc,
          std::size_t fold = 0) {
  Cell c;
  c.dataset = dataset;
  c.learner = learner;
  c.condition = condition;
  c.accuracy = acc;
  c.fold = fold;
  return c;
}

Dataset clean_blobs(std::uint64_t seed, std::size_t per_class = 20) {
  return make_blobs(BlobOptions{2, per_class, 2, 0.05, seed});
}

}  // namespace

TEST(Wilcoxon, AllPositiveSix) {
  const std::vector<double> a{1, 2, 3, 4, 5, 6}, b(6, 0.0);
  const auto r = wilcoxon_signed_ranks(a, b);
  EXPECT_EQ(r.p_two_sided, 0.03125);
  EXPECT_EQ(r.w_minus, 0.0);
  EXPECT_EQ(r.w_plus, 21.0);
  EXPECT_EQ(r.method, WilcoxonResult::Method::exact);
}

TEST(Wilcoxon, TiedMagnitudesShareRanks) {
  const std::vector<double> a{1, -1}, b{0, 0};
  const auto r = wilcoxon_signed_ranks(a, b);
  EXPECT_EQ(r.w_plus, 1.5);
  EXPECT_EQ(r.w_minus, 1.5);
  EXPECT_EQ(r.p_two_sided, 1.0);
}

TEST(Wilcoxon, IdenticalSamples) {
  const std::vector<double> a{0.3, 0.5, 0.7, 0.9};
  const auto r = wilcoxon_signed_ranks(a, a);
  EXPECT_EQ(r.p_two_sided, 1.0);
  EXPECT_EQ(r.w_plus, r.w_minus);
  EXPECT_DOUBLE_EQ(r.w_plus + r.w_minus, r.n_effective * (r.n_effective + 1) / 2.0);
}

TEST(Wilcoxon, OddZeroCountDropsOne) {
  const std::vector<double> a{0, 0, 0, 2}, b{0, 0, 0, 0};
  const auto r = wilcoxon_signed_ranks(a, b);
  EXPECT_EQ(r.n_effective, 3u);
  EXPECT_DOUBLE_EQ(r.w_plus, 3.0 + 1.5);
  EXPECT_DOUBLE_EQ(r.w_minus, 1.5);
}

TEST(Wilcoxon, Errors) {
  EXPECT_THROW(wilcoxon_signed_ranks(std::vector<double>{1}, std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(wilcoxon_signed_ranks(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
}

TEST(Wilcoxon, ExactMatchesBruteForce) {
  Rng rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(12);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      // coarse grid so ties and zeros occur
      a[i] = trial % 2 ? static_cast<double>(rng.uniform_index(5)) : rng.normal();
      b[i] = trial % 2 ? static_cast<double>(rng.uniform_index(5)) : rng.normal();
    }
    const auto r = wilcoxon_signed_ranks(a, b);
    EXPECT_NEAR(r.p_two_sided, brute_force_p(a, b), 1e-12) << trial;
    EXPECT_NEAR(r.w_plus + r.w_minus, r.n_effective * (r.n_effective + 1) / 2.0, 1e-9);
  }
}

TEST(Wilcoxon, NormalApproximationForLargeSamples) {
  std::vector<double> a(30), b(30, 0.0);
  for (std::size_t i = 0; i < 30; ++i) a[i] = static_cast<double>(i + 1);
  const auto r = wilcoxon_signed_ranks(a, b);
  EXPECT_EQ(r.method, WilcoxonResult::Method::normal_approximation);
  EXPECT_LT(r.p_two_sided, 1e-5);
  EXPECT_GT(r.p_two_sided, 0.0);
  for (std::size_t i = 0; i < 30; ++i) b[i] = a[i] + (i % 2 ? 0.5 : -0.5);
  const auto even = wilcoxon_signed_ranks(a, b);
  EXPECT_GT(even.p_two_sided, 0.5);
  EXPECT_LE(even.p_two_sided, 1.0);
}

TEST(Voting, PluralityWithLowestIndexTies) {
  testkit::register_constant_learners();
  const auto d = numeric_dataset({{0}, {1}, {2}}, {0, 1, 2}, {"A", "B", "C"});
  const auto specs = parse_learner_list("constant:label=0,constant:label=0,constant:label=1,constant:label=1,constant:label=2");
  const auto m = voting_fit(specs, d);
  EXPECT_EQ(m.predict(Instance{{0}, 0}), 0u);
  const auto agree = parse_learner_list("constant:label=2,constant:label=2");
  EXPECT_EQ(voting_fit(agree, d).predict(Instance{{0}, 0}), 2u);
  EXPECT_THROW(voting_fit(std::vector<LearnerSpec>{}, d), std::invalid_argument);
}

TEST(Conditions, ParseNames) {
  EXPECT_EQ(parse_condition("filtered-voting"), Condition::filtered_voting);
  EXPECT_EQ(parse_condition("fvoting"), Condition::filtered_voting);
  EXPECT_EQ(to_string(Condition::adaptive), "adaptive");
  EXPECT_THROW(parse_condition("bagging"), std::invalid_argument);
}

TEST(Experiment, GridArithmetic) {
  ExperimentPlan plan;
  plan.datasets = {clean_blobs(1)};
  plan.learners = {LearnerSpec::parse("knn")};
  plan.conditions = {Condition::none, Condition::biased};
  plan.repeats = 1;
  plan.folds = 2;
  EXPECT_EQ(run_experiment(plan).cells.size(), 4u);

  plan.conditions = {Condition::none, Condition::ensemble, Condition::voting, Condition::filtered_voting};
  plan.learners = parse_learner_list("knn,naive-bayes");
  plan.thresholds = {0.5, 0.9};
  plan.repeats = 2;
  // per fold: 2 none + 2x2 ensemble + 1 voting + 2 fvoting
  EXPECT_EQ(run_experiment(plan).cells.size(), 2u * 2u * 9u);
}

TEST(Experiment, PlanValidation) {
  ExperimentPlan plan;
  EXPECT_THROW(run_experiment(plan), std::invalid_argument);
  plan.datasets = {clean_blobs(1)};
  plan.learners = {LearnerSpec::parse("knn")};
  plan.folds = 1;
  EXPECT_THROW(run_experiment(plan), std::invalid_argument);
  plan.folds = 2;
  plan.repeats = 0;
  EXPECT_THROW(run_experiment(plan), std::invalid_argument);
  plan.repeats = 1;
  plan.learners = {LearnerSpec::parse("nope")};
  EXPECT_THROW(run_experiment(plan), std::invalid_argument);
  plan.learners = {LearnerSpec::parse("knn")};
  plan.conditions = {Condition::ensemble};
  plan.thresholds = {1.2};
  EXPECT_THROW(run_experiment(plan), std::invalid_argument);
}

TEST(Experiment, NoOpFilterReproducesUnfilteredCells) {
  ExperimentPlan plan;
  plan.datasets = {clean_blobs(3, 30)};
  plan.learners = builtin_learners(2);
  plan.conditions = {Condition::none, Condition::ensemble};
  plan.thresholds = {0.5};
  plan.repeats = 1;
  plan.folds = 3;
  const auto result = run_experiment(plan);
  std::map<std::tuple<std::size_t, std::string>, double> none;
  for (const auto& c : result.cells) {
    ASSERT_FALSE(c.failed()) << c.error;
    if (c.condition == "none") none[{c.fold, c.learner}] = c.accuracy;
  }
  for (const auto& c : result.cells) {
    if (c.condition != "ensemble@0.5") continue;
    EXPECT_EQ(c.removed, 0u);
    EXPECT_EQ(c.accuracy, (none[{c.fold, c.learner}]));
  }
}

TEST(Experiment, SerialAndParallelAgreeBitForBit) {
  ExperimentPlan plan;
  plan.datasets = {inject_label_noise(make_blobs(BlobOptions{3, 20, 2, 0.5, 1}), 0.2, 1).data.renamed("a"),
                   make_blobs(BlobOptions{2, 25, 3, 0.6, 2}).renamed("b")};
  plan.learners = parse_learner_list("knn,decision-tree");
  plan.conditions = {Condition::none, Condition::biased, Condition::ensemble, Condition::adaptive,
                     Condition::voting, Condition::filtered_voting};
  plan.repeats = 2;
  plan.folds = 3;
  plan.seed = 99;
  plan.jobs = 1;
  const auto serial = results_csv(run_experiment(plan));
  plan.jobs = 4;
  const auto parallel = results_csv(run_experiment(plan));
  EXPECT_EQ(serial, parallel);
  plan.seed = 100;
  EXPECT_NE(serial, results_csv(run_experiment(plan)));
}

TEST(Experiment, FiltersNeverSeeTestInstances) {
  testkit::register_spy_learner();
  auto& log = testkit::SpyLog::instance();
  log.clear();
  const Dataset data = inject_label_noise(make_blobs(BlobOptions{2, 20, 2, 0.5, 5}), 0.2, 5).data;
  ExperimentPlan plan;
  plan.datasets = {data};
  plan.learners = parse_learner_list("spy");
  plan.ensemble = parse_learner_list("spy,knn,naive-bayes");
  plan.conditions = {Condition::none, Condition::biased, Condition::ensemble, Condition::adaptive,
                     Condition::voting, Condition::filtered_voting};
  plan.flag_mode = FlagMode::cross_validated(3, 0);
  plan.repeats = 2;
  plan.folds = 4;
  plan.seed = 3;
  const auto result = run_experiment(plan);
  for (const auto& c : result.cells) EXPECT_FALSE(c.failed()) << c.error;

  std::vector<std::vector<std::set<testkit::SpyLog::Key>>> tests;  // per repeat, per fold
  for (std::size_t r = 0; r < plan.repeats; ++r) {
    const auto folds = stratified_folds(data, plan.folds, fold_seed(plan.seed, data.name(), r));
    tests.emplace_back();
    for (std::size_t f = 0; f < plan.folds; ++f) {
      std::set<testkit::SpyLog::Key> keys;
      for (auto i : folds.test_indices(f)) keys.insert(testkit::SpyLog::key(data.instance(i)));
      tests.back().push_back(std::move(keys));
    }
  }
  const auto fits = log.fits();
  ASSERT_FALSE(fits.empty());
  for (const auto& seen : fits) {
    // every fit must avoid the test part of at least one planned fold
    bool clean = false;
    for (const auto& repeat : tests) {
      for (const auto& test : repeat) {
        bool disjoint = true;
        for (const auto& k : seen) {
          if (test.count(k)) {
            disjoint = false;
            break;
          }
        }
        clean = clean || disjoint;
      }
    }
    EXPECT_TRUE(clean);
  }
}

TEST(Summary, IdenticalConditionsCountAsEqual) {
  ExperimentResult r;
  for (int d = 0; d < 4; ++d) {
    const std::string name = "d" + std::to_string(d);
    r.cells.push_back(cell(name, "knn", "none", 0.5 + 0.1 * d));
    r.cells.push_back(cell(name, "knn", "ensemble@0.5", 0.5 + 0.1 * d));
  }
  const auto t = summarize(r, "none", "ensemble@0.5");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].greater, 0u);
  EXPECT_EQ(t.rows[0].equal, 4u);
  EXPECT_EQ(t.rows[0].less, 0u);
  EXPECT_EQ(t.rows[0].wilcoxon.p_two_sided, 1.0);
  EXPECT_THROW(summarize(r, "none", "adaptive"), std::invalid_argument);
}

TEST(Summary, UniformGainOnSixDatasets) {
  ExperimentResult r;
  for (int d = 0; d < 6; ++d) {
    const std::string name = "d" + std::to_string(d);
    for (std::size_t f = 0; f < 2; ++f) {
      const double base = 0.6 + 0.05 * d + 0.01 * static_cast<double>(f);
      r.cells.push_back(cell(name, "knn", "none", base, f));
      r.cells.push_back(cell(name, "knn", "ensemble@0.5", base + 0.01, f));
    }
  }
  const auto t = summarize(r, "none", "ensemble@0.5");
  EXPECT_EQ(t.rows[0].greater, 6u);
  EXPECT_EQ(t.rows[0].equal, 0u);
  EXPECT_EQ(t.rows[0].less, 0u);
  EXPECT_EQ(t.rows[0].wilcoxon.p_two_sided, 0.03125);
}

TEST(Summary, FiftyFourDatasetMockRecount) {
  Rng rng(54);
  ExperimentResult r;
  std::size_t greater = 0, equal = 0, less = 0;
  double base_total = 0, comp_total = 0;
  for (int d = 0; d < 54; ++d) {
    const std::string name = "uci" + std::to_string(d);
    double base_sum = 0, comp_sum = 0;
    const int kind = static_cast<int>(rng.uniform_index(3));
    for (std::size_t f = 0; f < 10; ++f) {
      const double base = rng.uniform(0.5, 0.95);
      const double comp = kind == 0 ? base : base + (kind == 1 ? 0.02 : -0.02);
      r.cells.push_back(cell(name, "c4.5", "none", base, f));
      r.cells.push_back(cell(name, "c4.5", "ensemble@0.7", comp, f));
      base_sum += base;
      comp_sum += comp;
    }
    const double bm = base_sum / 10, cm = comp_sum / 10;
    base_total += bm;
    comp_total += cm;
    if (std::abs(cm - bm) <= 1e-9) {
      ++equal;
    } else if (cm > bm) {
      ++greater;
    } else {
      ++less;
    }
  }
  const auto t = summarize(r, "none", "ensemble@0.7");
  EXPECT_EQ(t.rows[0].greater, greater);
  EXPECT_EQ(t.rows[0].equal, equal);
  EXPECT_EQ(t.rows[0].less, less);
  EXPECT_NEAR(t.rows[0].baseline_mean, base_total / 54, 1e-12);
  EXPECT_NEAR(t.rows[0].comparison_mean, comp_total / 54, 1e-12);
  EXPECT_EQ(t.rows[0].wilcoxon.method, WilcoxonResult::Method::normal_approximation);
}

TEST(Summary, MaxConditionTakesBestThresholdPerDataset) {
  ExperimentResult r;
  r.cells.push_back(cell("a", "voting", "voting", 0.8));
  r.cells.push_back(cell("a", "voting", "fvoting@0.5", 0.7));
  r.cells.push_back(cell("a", "voting", "fvoting@0.9", 0.85));
  r.cells.push_back(cell("b", "voting", "voting", 0.8));
  r.cells.push_back(cell("b", "voting", "fvoting@0.5", 0.75));
  r.cells.push_back(cell("b", "voting", "fvoting@0.9", 0.6));
  const auto t = summarize(r, "voting", "fvoting@max");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].comparison_means, (std::vector<double>{0.85, 0.75}));
}

TEST(Summary, FailedCellsAreSkipped) {
  ExperimentResult r;
  r.cells.push_back(cell("a", "knn", "none", 0.8));
  r.cells.push_back(cell("a", "knn", "none", 0.6, 1));
  auto broken = cell("a", "knn", "adaptive", std::nan(""));
  broken.error = "boom";
  r.cells.push_back(broken);
  r.cells.push_back(cell("a", "knn", "adaptive", 0.9, 1));
  const auto t = summarize(r, "none", "adaptive");
  EXPECT_DOUBLE_EQ(t.rows[0].baseline_mean, 0.7);
  EXPECT_DOUBLE_EQ(t.rows[0].comparison_mean, 0.9);
  const std::vector<SummaryTable> tables{t};
  const auto json = summary_json(r, tables);
  EXPECT_NE(json.find("\"schema\": \"purgelab.summary/1\""), std::string::npos);
  EXPECT_NE(json.find("\"error\": \"boom\""), std::string::npos);
  const auto csv = results_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "schema,dataset,repeat,fold,learner,condition,accuracy,train_size,removed,fell_back,error");
  EXPECT_NE(csv.find("purgelab.results/1,a,0,0,knn,adaptive,,0,0,0,boom"), std::string::npos);
}
