// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Run by ctest under the "acceptance" label.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "purgelab/cli.hpp"
#include "purgelab/diversity.hpp"
#include "purgelab/evalstats.hpp"
#include "purgelab/filters.hpp"
#include "purgelab/io.hpp"
#include "purgelab/learners.hpp"
#include "purgelab/measures.hpp"
#include "purgelab/random.hpp"
#include "purgelab/synthetic.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace purgelab;
namespace pt = purgelab::testkit;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<Verdict()> run;
};

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// 500 instances, 2-4 classes, varying dimension and overlap.
struct NoisyBlobs {
  Dataset data;
  std::vector<std::size_t> corrupted;
};

std::vector<NoisyBlobs> noisy_blobs() {
  std::vector<NoisyBlobs> out;
  for (std::uint64_t s = 0; s < 10; ++s) {
    BlobOptions o;
    o.class_count = 2 + s % 3;
    o.per_class = (500 + o.class_count - 1) / o.class_count;
    o.dimension = 2 + s % 4;
    o.spread = 0.3 + 0.02 * static_cast<double>(s % 5);
    o.seed = 1000 + s;
    auto full = make_blobs(o);
    std::vector<std::size_t> first(500);
    for (std::size_t i = 0; i < 500; ++i) first[i] = i;
    auto noisy = inject_label_noise(full.subset(first), 0.25, 2000 + s);
    out.push_back({noisy.data.renamed("noisy" + std::to_string(s)), noisy.corrupted});
  }
  return out;
}

std::vector<Dataset> clean_blobs() {
  std::vector<Dataset> out;
  for (std::uint64_t s = 0; s < 10; ++s) {
    BlobOptions o;
    o.class_count = 2 + s % 3;
    o.per_class = 60 + 10 * (s % 4);
    o.dimension = 2 + s % 3;
    o.spread = 0.25 + 0.05 * static_cast<double>(s % 6);
    o.seed = 3000 + s;
    out.push_back(make_blobs(o).renamed("clean" + std::to_string(s)));
  }
  return out;
}

Verdict filter_monotonicity() {
  Verdict v;
  Rng rng(1);
  std::size_t violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t learners = 1 + rng.uniform_index(9);
    const std::size_t n = 1 + rng.uniform_index(500);
    const double density = rng.uniform01();
    std::vector<std::string> ids;
    for (std::size_t l = 0; l < learners; ++l) ids.push_back("l" + std::to_string(l));
    std::vector<std::uint8_t> flags(learners * n);
    for (auto& f : flags) f = rng.uniform01() < density;
    const MisclassificationMatrix m(ids, n, flags);
    const auto r5 = ensemble_filter(m, 0.5).removed;
    const auto r7 = ensemble_filter(m, 0.7).removed;
    const auto r9 = ensemble_filter(m, 0.9).removed;
    violations += !std::includes(r7.begin(), r7.end(), r9.begin(), r9.end());
    violations += !std::includes(r5.begin(), r5.end(), r7.begin(), r7.end());
  }
  v.require(violations == 0, std::to_string(violations) + " subset violations");
  if (v.pass) v.detail = "100 matrices, 0 violations";
  return v;
}

Verdict wilcoxon_oracle() {
  Verdict v;
  Rng rng(2);
  double worst = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(12);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (trial % 2) {
        a[i] = static_cast<double>(rng.uniform_index(6));
        b[i] = static_cast<double>(rng.uniform_index(6));
      } else {
        a[i] = rng.normal();
        b[i] = rng.normal();
      }
    }
    const auto r = wilcoxon_signed_ranks(a, b);
    v.require(r.method == WilcoxonResult::Method::exact, "normal approximation used for n <= 12");
    worst = std::max(worst, std::abs(r.p_two_sided - pt::brute_force_p(a, b)));
  }
  v.require(worst <= 1e-12, "max |dp| = " + sci(worst));
  const std::vector<double> six{1, 2, 3, 4, 5, 6}, zeros(6, 0.0);
  const double p6 = wilcoxon_signed_ranks(six, zeros).p_two_sided;
  v.require(p6 == 0.03125, "(1..6) vs zeros gave p = " + fmt(p6, 8));
  if (v.pass) v.detail = "500 inputs, max |dp| = " + sci(worst) + ", p(1..6) = 0.03125";
  return v;
}

Verdict noise_recovery() {
  Verdict v;
  ExperimentPlan plan;
  for (auto& nb : noisy_blobs()) plan.datasets.push_back(nb.data);
  plan.learners = {LearnerSpec::parse("knn:k=1")};
  plan.ensemble = builtin_learners();
  plan.conditions = {Condition::none, Condition::ensemble};
  plan.thresholds = {0.5};
  plan.flag_mode = FlagMode::train_on_all();
  plan.repeats = 1;
  plan.folds = 10;
  plan.seed = 3;
  const auto result = run_experiment(plan);
  for (const auto& c : result.cells) v.require(!c.failed(), "cell failed: " + c.error);
  const auto t = summarize(result, "none", "ensemble@0.5");
  const auto& row = t.rows.at(0);
  const double p = row.wilcoxon.p_two_sided;
  const std::string stats = "improved " + std::to_string(row.greater) + "/10, mean " + fmt(row.baseline_mean) +
                            " -> " + fmt(row.comparison_mean) + ", p = " + fmt(p, 5);
  v.require(row.greater >= 8, stats);
  v.require(p < 0.05, stats);
  if (v.pass) v.detail = stats;
  return v;
}

Verdict clean_data_headline() {
  Verdict v;
  ExperimentPlan plan;
  plan.datasets = clean_blobs();
  plan.learners = {LearnerSpec::parse("knn")};
  plan.ensemble = builtin_learners();
  plan.conditions = {Condition::voting, Condition::filtered_voting};
  plan.thresholds = {0.5, 0.7, 0.9};
  plan.flag_mode = FlagMode::train_on_all();
  plan.repeats = 1;
  plan.folds = 10;
  plan.seed = 4;
  const auto result = run_experiment(plan);
  for (const auto& c : result.cells) v.require(!c.failed(), "cell failed: " + c.error);
  std::string stats;
  for (const char* t : {"0.5", "0.7", "0.9"}) {
    const auto table = summarize(result, "voting", std::string("fvoting@") + t);
    const auto& row = table.rows.at(0);
    const std::size_t not_worse = row.equal + row.less;  // comparison <= baseline
    stats += std::string(stats.empty() ? "" : ", ") + "FEns" + t + " unfiltered>=filtered " +
             std::to_string(not_worse) + "/10";
    v.require(not_worse >= 7, "FEns " + std::string(t) + ": unfiltered >= filtered on only " +
                                  std::to_string(not_worse) + "/10");
    if (std::string(t) == "0.9") {
      double worst = -1;
      for (std::size_t d = 0; d < row.datasets.size(); ++d) {
        worst = std::max(worst, row.comparison_means[d] - row.baseline_means[d]);
      }
      v.require(worst <= 0.01, "FEns 0.9 beats unfiltered by " + fmt(worst));
      stats += ", max FEns0.9 gain " + fmt(worst);
    }
  }
  if (v.pass) v.detail = stats;
  return v;
}

Verdict hardness_separation() {
  Verdict v;
  const auto specs = builtin_learners();
  double worst_gap = 1, worst_precision = 1;
  for (const auto& nb : noisy_blobs()) {
    const auto ih = instance_hardness(nb.data, specs, CvProtocol{1, 10, 5});
    const std::set<std::size_t> corrupted(nb.corrupted.begin(), nb.corrupted.end());
    double noisy_sum = 0, clean_sum = 0;
    for (std::size_t i = 0; i < ih.size(); ++i) (corrupted.count(i) ? noisy_sum : clean_sum) += ih[i];
    const double gap = noisy_sum / static_cast<double>(corrupted.size()) -
                       clean_sum / static_cast<double>(ih.size() - corrupted.size());
    const auto flagged = noisy_instances(ih, 0.9).indices;
    std::size_t hits = 0;
    for (auto i : flagged) hits += corrupted.count(i);
    const double precision = flagged.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(flagged.size());
    worst_gap = std::min(worst_gap, gap);
    worst_precision = std::min(worst_precision, precision);
    v.require(gap > 0.3, nb.data.name() + ": IH gap " + fmt(gap));
    v.require(precision > 0.6, nb.data.name() + ": precision " + fmt(precision));
  }
  if (v.pass) v.detail = "10 datasets, min IH gap " + fmt(worst_gap) + ", min precision " + fmt(worst_precision);
  return v;
}

Verdict adaptive_contract() {
  Verdict v;
  const auto candidates = builtin_learners();
  const char* targets[] = {"knn:k=1", "decision-tree", "naive-bayes", "one-rule", "knn"};
  std::size_t empty_sets = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    BlobOptions o;
    o.class_count = 2 + seed % 3;
    o.per_class = 20 + seed % 15;
    o.dimension = 2 + seed % 3;
    o.spread = 0.4;
    o.seed = 5000 + seed;
    const auto d = inject_label_noise(make_blobs(o), 0.1 * static_cast<double>(seed % 4), seed).data;
    AdaptiveOptions opt;
    opt.seed = seed;
    opt.mode = FlagMode::cross_validated(3, seed);
    const auto target = LearnerSpec::parse(targets[seed % 5]);
    const auto trace = adaptive_filter(candidates, target, d, opt);
    const std::string tag = "seed " + std::to_string(seed) + ": ";
    v.require(trace.accuracies.size() == trace.chosen.size() + 1, tag + "trace length");
    v.require(trace.chosen.size() <= candidates.size(), tag + "|F| > |candidates|");
    for (std::size_t k = 1; k < trace.accuracies.size(); ++k) {
      v.require(trace.accuracies[k] > trace.accuracies[k - 1], tag + "accuracies not strictly increasing");
    }
    const auto split = stratified_holdout(d, opt.validation_fraction, trace.split_seed);
    const double baseline = accuracy(fit(target, d.subset(split.train)), d.subset(split.validation));
    v.require(trace.accuracies.at(0) == baseline, tag + "empty set differs from unfiltered baseline");
    if (trace.chosen.empty()) {
      ++empty_sets;
      v.require(adaptive_outcome(trace, candidates, d, opt).removed.empty(), tag + "empty set removed instances");
    }
  }
  if (v.pass) v.detail = "50 runs, " + std::to_string(empty_sets) + " with an empty filter set";
  return v;
}

Verdict cod_hac_oracle() {
  Verdict v;
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const auto m = pt::random_matrix(rng, n);
    const auto tree = agglomerate(m);
    const auto oracle = pt::brute_force_upgma(m);
    v.require(tree.merges.size() == oracle.size(), "merge count");
    for (std::size_t k = 0; k < oracle.size() && k < tree.merges.size(); ++k) {
      const bool same = tree.members(tree.merges[k].a) == oracle[k].a && tree.members(tree.merges[k].b) == oracle[k].b &&
                        std::abs(tree.merges[k].height - oracle[k].height) <= 1e-12;
      v.require(same, "trial " + std::to_string(trial) + " merge " + std::to_string(k) + " differs");
    }
  }
  const auto specs = parse_learner_list("knn,knn,decision-tree,naive-bayes,naive-bayes,one-rule,mlp,mlp");
  for (std::uint64_t run = 0; run < 5; ++run) {
    std::vector<Dataset> data;
    for (std::uint64_t d = 0; d < 2; ++d) {
      data.push_back(inject_label_noise(make_blobs(BlobOptions{2 + d, 25, 2, 0.5, run * 10 + d}), 0.1, run).data);
    }
    const auto m = cod_matrix(specs, data, CvProtocol{1, 5, run});
    for (std::size_t i = 0; i < m.size(); ++i) {
      v.require(m.at(i, i) == 0.0, "nonzero diagonal");
      for (std::size_t j = 0; j < m.size(); ++j) v.require(m.at(i, j) == m.at(j, i), "asymmetric COD");
    }
    for (auto [i, j] : {std::pair{0, 1}, std::pair{3, 4}, std::pair{6, 7}}) {
      v.require(m.at(i, j) == 0.0, "duplicate " + specs[i].to_string() + " has COD " + fmt(m.at(i, j)));
    }
  }
  if (v.pass) v.detail = "200 HAC trials match, 5 COD matrices symmetric, duplicates at 0";
  return v;
}

Verdict measures_oracles() {
  Verdict v;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto d = pt::random_dataset(seed + 700, 15 + seed % 20, 1 + seed % 3, seed % 2, 2 + seed % 3,
                                      seed % 4 == 0 ? 0.1 : 0.0);
    v.require(complexity_measures(d).n3 == pt::loo_knn1_error(d), "N3 differs on dataset " + std::to_string(seed));
  }
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto d = pt::random_dataset(seed + 900, 3 + seed % 6, 2, 0, 2);
    v.require(std::abs(complexity_measures(d).n1 - pt::brute_force_n1(d)) <= 1e-15,
              "N1 differs on dataset " + std::to_string(seed));
  }
  const auto x = pt::xor_dataset();
  v.require(complexity_measures(x).n3 == 1.0, "XOR N3 != 1");
  v.require(k_disagreeing_neighbors(x, 1) == std::vector<double>(4, 1.0), "XOR kDN(1) != 1");
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = make_blobs(BlobOptions{2 + seed % 3, 10 + seed, 2, 0.5, seed});
    const auto h = hardness_measures(d, 5, seed);
    for (std::size_t i = 0; i < d.size(); ++i) {
      v.require(h.mv[i] == 1.0, "balanced MV != 1");
      v.require(std::abs(h.cb[i]) <= 1e-15, "balanced CB != 0");
    }
  }
  if (v.pass) v.detail = "N3 x50, N1 x30, XOR, MV/CB x10";
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  Verdict v;
  const char* base = std::getenv("PURGELAB_TEST_TMP");
  const fs::path dir = fs::path(base ? base : fs::temp_directory_path().string()) / "acceptance-determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  save_dataset(inject_label_noise(make_blobs(BlobOptions{3, 30, 2, 0.5, 1}), 0.2, 1).data, dir / "three.csv");
  save_dataset(make_blobs(BlobOptions{2, 40, 4, 0.6, 2}), dir / "two.arff");
  std::ofstream(dir / "plan.json") << R"({
  "datasets": ["three.csv", "two.arff", {"name": "synth", "blobs": {"classes": 4, "per_class": 15}, "noise": 0.1}],
  "learners": ["knn", "decision-tree", "naive-bayes"],
  "conditions": ["none", "biased", "ensemble", "adaptive", "voting", "filtered-voting"],
  "repeats": 2,
  "folds": 5,
  "seed": 17
})";
  std::vector<std::string> outputs;
  for (const char* jobs : {"1", "8"}) {
    const std::string out = (dir / (std::string("jobs") + jobs)).string();
    const std::string config = (dir / "plan.json").string();
    const char* argv[] = {"purgelab", "run", "--config", config.c_str(), "--jobs", jobs, "--out", out.c_str()};
    std::ostringstream sink, err;
    const int code = run_cli(8, argv, sink, err);
    v.require(code == 0, std::string("run --jobs ") + jobs + " exited " + std::to_string(code) + ": " + err.str());
    outputs.push_back(out);
  }
  const auto csv1 = slurp(fs::path(outputs[0]) / "results.csv");
  const auto json1 = slurp(fs::path(outputs[0]) / "summary.json");
  v.require(!csv1.empty() && !json1.empty(), "empty outputs");
  v.require(csv1 == slurp(fs::path(outputs[1]) / "results.csv"), "results.csv differs between --jobs 1 and 8");
  v.require(json1 == slurp(fs::path(outputs[1]) / "summary.json"), "summary.json differs between --jobs 1 and 8");
  if (v.pass) {
    v.detail = std::to_string(std::count(csv1.begin(), csv1.end(), '\n') - 1) + " cells, byte-identical CSV and JSON";
  }
  return v;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"C1 filter monotonicity", 10, filter_monotonicity},
      {"C2 wilcoxon exact oracle", 30, wilcoxon_oracle},
      {"C3 noise recovery direction", 300, noise_recovery},
      {"C4 clean-data filtering does not help voting", 600, clean_data_headline},
      {"C5 hardness separation", 0, hardness_separation},
      {"C6 adaptive search contract", 0, adaptive_contract},
      {"C7 cod/hac oracle", 0, cod_hac_oracle},
      {"C8 measures oracles", 0, measures_oracles},
      {"C9 determinism across jobs", 0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && seconds > c.budget_seconds) {
      v.require(false, "runtime " + fmt(seconds, 1) + " s exceeds " + fmt(c.budget_seconds, 0) + " s");
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << c.name << " (" << v.detail << ") [" << fmt(seconds, 2) << " s]"
              << std::endl;
  }
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << criteria.size() - static_cast<std::size_t>(failures) << "/"
            << criteria.size() << std::endl;
  return failures ? 1 : 0;
}
