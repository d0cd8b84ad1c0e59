#include <benchmark/benchmark.h>

#include "purgelab/diversity.hpp"
#include "purgelab/evalstats.hpp"
#include "purgelab/filters.hpp"
#include "purgelab/learners.hpp"
#include "purgelab/measures.hpp"
#include "purgelab/random.hpp"
#include "purgelab/synthetic.hpp"

using namespace purgelab;

namespace {

Dataset noisy(std::size_t per_class) {
  return inject_label_noise(make_blobs(BlobOptions{3, per_class, 4, 0.5, 1}), 0.2, 1).data;
}

void BM_Fit(benchmark::State& state, const char* spec) {
  const auto data = noisy(static_cast<std::size_t>(state.range(0)));
  const auto s = LearnerSpec::parse(spec);
  for (auto _ : state) benchmark::DoNotOptimize(fit(s, data));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK_CAPTURE(BM_Fit, knn, "knn")->Arg(100);
BENCHMARK_CAPTURE(BM_Fit, tree, "decision-tree")->Arg(100)->Arg(300);
BENCHMARK_CAPTURE(BM_Fit, naive_bayes, "naive-bayes")->Arg(100)->Arg(300);
BENCHMARK_CAPTURE(BM_Fit, mlp, "mlp")->Arg(100);
BENCHMARK_CAPTURE(BM_Fit, one_rule, "one-rule")->Arg(100)->Arg(300);

void BM_FlagMisclassified(benchmark::State& state) {
  const auto data = noisy(static_cast<std::size_t>(state.range(0)));
  const auto specs = builtin_learners();
  for (auto _ : state) benchmark::DoNotOptimize(flag_misclassified(specs, data, FlagMode::train_on_all()));
}
BENCHMARK(BM_FlagMisclassified)->Arg(50)->Arg(150)->Unit(benchmark::kMillisecond);

void BM_Wilcoxon(benchmark::State& state) {
  Rng rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.normal();
    b[i] = rng.normal();
  }
  for (auto _ : state) benchmark::DoNotOptimize(wilcoxon_signed_ranks(a, b));
}
BENCHMARK(BM_Wilcoxon)->Arg(12)->Arg(25)->Arg(54);

void BM_Agglomerate(benchmark::State& state) {
  Rng rng(4);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<std::string> ids;
  std::vector<double> flat(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("l" + std::to_string(i));
    for (std::size_t j = i + 1; j < n; ++j) flat[i * n + j] = flat[j * n + i] = rng.uniform01();
  }
  const CodMatrix m(ids, flat);
  for (auto _ : state) benchmark::DoNotOptimize(agglomerate(m));
}
BENCHMARK(BM_Agglomerate)->Arg(20)->Arg(100);

void BM_Complexity(benchmark::State& state) {
  const auto data = noisy(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(complexity_measures(data));
}
BENCHMARK(BM_Complexity)->Arg(50)->Arg(150)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
