#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "purgelab/evalstats.hpp"

namespace purgelab {

namespace {

constexpr std::size_t kExactLimit = 25;

}  // namespace

WilcoxonResult wilcoxon_signed_ranks(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: sequences differ in length");
  if (a.empty()) throw std::invalid_argument("wilcoxon: empty sequences");

  std::vector<double> diffs;
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (!std::isfinite(d)) throw std::invalid_argument("wilcoxon: non-finite difference");
    if (d == 0.0) {
      ++zeros;
    } else {
      diffs.push_back(d);
    }
  }
  if (zeros % 2 == 1) --zeros;

  // Rank |d| with zeros first; doubled ranks stay integral under ties.
  const std::size_t n = zeros + diffs.size();
  std::vector<double> magnitude(n, 0.0);
  for (std::size_t i = 0; i < diffs.size(); ++i) magnitude[zeros + i] = std::abs(diffs[i]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return magnitude[x] < magnitude[y]; });
  std::vector<std::int64_t> rank2(n, 0);
  double tie_term = 0.0;
  for (std::size_t lo = 0; lo < n;) {
    std::size_t hi = lo;
    while (hi + 1 < n && magnitude[order[hi + 1]] == magnitude[order[lo]]) ++hi;
    const auto shared = static_cast<std::int64_t>(lo + 1 + hi + 1);  // twice the mean rank
    for (std::size_t k = lo; k <= hi; ++k) rank2[order[k]] = shared;
    const double t = static_cast<double>(hi - lo + 1);
    tie_term += t * t * t - t;
    lo = hi + 1;
  }

  std::int64_t zero2 = 0, plus2 = 0, minus2 = 0;
  for (std::size_t i = 0; i < zeros; ++i) zero2 += rank2[i];
  for (std::size_t i = 0; i < diffs.size(); ++i) (diffs[i] > 0 ? plus2 : minus2) += rank2[zeros + i];

  WilcoxonResult r;
  r.n_effective = n;
  r.w_plus = static_cast<double>(plus2) / 2.0 + static_cast<double>(zero2) / 4.0;
  r.w_minus = static_cast<double>(minus2) / 2.0 + static_cast<double>(zero2) / 4.0;
  if (diffs.empty()) {
    r.p_two_sided = 1.0;
    return r;
  }

  if (n <= kExactLimit) {
    r.method = WilcoxonResult::Method::exact;
    // Distribution of the doubled positive sum over all sign assignments of
    // the non-zero ranks; zero ranks contribute a constant.
    const std::int64_t total2 = plus2 + minus2;
    std::vector<double> ways(static_cast<std::size_t>(total2) + 1, 0.0);
    ways[0] = 1.0;
    std::int64_t reach = 0;
    for (std::size_t i = 0; i < diffs.size(); ++i) {
      const auto step = rank2[zeros + i];
      for (std::int64_t s = reach; s >= 0; --s) ways[static_cast<std::size_t>(s + step)] += ways[static_cast<std::size_t>(s)];
      reach += step;
    }
    const std::int64_t observed = std::llabs(2 * plus2 - total2);
    double extreme = 0.0;
    for (std::int64_t s = 0; s <= total2; ++s) {
      if (std::llabs(2 * s - total2) >= observed) extreme += ways[static_cast<std::size_t>(s)];
    }
    r.p_two_sided = std::clamp(extreme / std::ldexp(1.0, static_cast<int>(diffs.size())), 0.0, 1.0);
    return r;
  }

  r.method = WilcoxonResult::Method::normal_approximation;
  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  if (variance <= 0.0) {
    r.p_two_sided = 1.0;
    return r;
  }
  const double z = std::max(0.0, std::abs(r.w_plus - mean) - 0.5) / std::sqrt(variance);
  r.p_two_sided = std::clamp(std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
  return r;
}

}  // namespace purgelab
