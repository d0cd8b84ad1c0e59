#include "purgelab/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "purgelab/error.hpp"
#include "purgelab/io.hpp"
#include "purgelab/parallel.hpp"

namespace purgelab {

CodMatrix::CodMatrix(std::vector<std::string> ids, std::vector<double> distances)
    : ids_(std::move(ids)), distances_(std::move(distances)) {
  const std::size_t n = ids_.size();
  if (distances_.size() != n * n) throw std::invalid_argument("COD matrix must be square");
  for (std::size_t a = 0; a < n; ++a) {
    if (at(a, a) != 0.0) throw std::invalid_argument("COD matrix diagonal must be zero");
    for (std::size_t b = 0; b < n; ++b) {
      const double d = at(a, b);
      if (!std::isfinite(d) || d < 0.0 || d > 1.0) {
        throw std::invalid_argument("COD entries must be finite and in [0, 1]");
      }
      if (std::abs(d - at(b, a)) > 1e-12) throw std::invalid_argument("COD matrix must be symmetric");
    }
  }
}

double cod_pair(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cod_pair: sequences differ in length");
  if (a.empty()) throw std::invalid_argument("cod_pair: empty sequences");
  std::size_t differ = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differ += a[i] != b[i] ? 1 : 0;
  return static_cast<double>(differ) / static_cast<double>(a.size());
}

CodMatrix cod_matrix(std::span<const LearnerSpec> specs, std::span<const Dataset> datasets,
                     const CvProtocol& protocol, std::size_t jobs) {
  if (specs.size() < 2) throw std::invalid_argument("cod_matrix needs at least two learners");
  if (datasets.empty()) throw std::invalid_argument("cod_matrix needs at least one dataset");
  if (protocol.repeats < 1) throw std::invalid_argument("cod_matrix needs at least one repeat");
  const std::size_t L = specs.size();

  // plans[d][r]
  std::vector<std::vector<FoldPlan>> plans(datasets.size());
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    for (std::size_t r = 0; r < protocol.repeats; ++r) {
      plans[d].push_back(stratified_folds(datasets[d], protocol.folds, protocol.repeat_seed(r)));
    }
  }
  // preds[(d * L + l)][r] = out-of-fold predictions
  std::vector<std::vector<std::vector<std::size_t>>> preds(datasets.size() * L);
  parallel_for(preds.size(), jobs, [&](std::size_t cell) {
    const std::size_t d = cell / L;
    const std::size_t l = cell % L;
    const Dataset& data = datasets[d];
    try {
      for (const auto& plan : plans[d]) {
        std::vector<std::size_t> out(data.size(), 0);
        for (std::size_t f = 0; f < plan.fold_count(); ++f) {
          const TrainedModel model = fit(specs[l], data.subset(plan.train_indices(f)));
          for (const auto i : plan.test_indices(f)) out[i] = model.predict(data.instance(i));
        }
        preds[cell].push_back(std::move(out));
      }
    } catch (const LearnerError& e) {
      throw LearnerError(specs[l].to_string(), "on dataset '" + data.name() + "': " + e.what());
    }
  });

  std::vector<double> distances(L * L, 0.0);
  for (std::size_t a = 0; a < L; ++a) {
    for (std::size_t b = a + 1; b < L; ++b) {
      double total = 0.0;
      for (std::size_t d = 0; d < datasets.size(); ++d) {
        double per_dataset = 0.0;
        for (std::size_t r = 0; r < protocol.repeats; ++r) {
          per_dataset += cod_pair(preds[d * L + a][r], preds[d * L + b][r]);
        }
        total += per_dataset / static_cast<double>(protocol.repeats);
      }
      distances[a * L + b] = distances[b * L + a] = total / static_cast<double>(datasets.size());
    }
  }
  std::vector<std::string> ids;
  for (const auto& s : specs) ids.push_back(s.to_string());
  return CodMatrix(std::move(ids), std::move(distances));
}

std::vector<std::size_t> Dendrogram::members(std::size_t cluster) const {
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack{cluster};
  const std::size_t n = leaves.size();
  while (!stack.empty()) {
    const std::size_t c = stack.back();
    stack.pop_back();
    if (c < n) {
      out.push_back(c);
    } else {
      const auto& m = merges.at(c - n);
      stack.push_back(m.a);
      stack.push_back(m.b);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Dendrogram agglomerate(const CodMatrix& matrix) {
  const std::size_t n = matrix.size();
  if (n < 2) throw std::invalid_argument("agglomerate needs at least two leaves");
  Dendrogram tree;
  tree.leaves = matrix.ids();

  struct Active {
    std::size_t id;
    std::size_t min_leaf;
    std::size_t size;
  };
  std::vector<Active> active;
  for (std::size_t i = 0; i < n; ++i) active.push_back({i, i, 1});
  // dist[i][j] between active slots, kept in sync with `active`
  std::vector<std::vector<double>> dist(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[i][j] = matrix.at(i, j);
  }

  while (active.size() > 1) {
    std::size_t bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> best_key{n, n};
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const auto key = std::minmax(active[i].min_leaf, active[j].min_leaf);
        const std::pair<std::size_t, std::size_t> k{key.first, key.second};
        if (dist[i][j] < best || (dist[i][j] == best && k < best_key)) {
          best = dist[i][j];
          best_key = k;
          bi = i;
          bj = j;
        }
      }
    }
    if (active[bj].min_leaf < active[bi].min_leaf) std::swap(bi, bj);
    const Active& left = active[bi];
    const Active& right = active[bj];
    const std::size_t size = left.size + right.size;
    tree.merges.push_back({left.id, right.id, best, size});

    // Lance-Williams update for average linkage, written into slot bi.
    for (std::size_t k = 0; k < active.size(); ++k) {
      if (k == bi || k == bj) continue;
      const double d = (static_cast<double>(left.size) * dist[bi][k] +
                        static_cast<double>(right.size) * dist[bj][k]) /
                       static_cast<double>(size);
      dist[bi][k] = dist[k][bi] = d;
    }
    active[bi] = {n + tree.merges.size() - 1, std::min(left.min_leaf, right.min_leaf), size};
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    dist.erase(dist.begin() + static_cast<std::ptrdiff_t>(bj));
    for (auto& row : dist) row.erase(row.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  return tree;
}

std::vector<std::vector<std::size_t>> cut(const Dendrogram& dendrogram, double height) {
  const std::size_t n = dendrogram.leaves.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t m = 0; m < dendrogram.merges.size(); ++m) {
    const auto& merge = dendrogram.merges[m];
    if (!(merge.height < height)) continue;
    const auto a = dendrogram.members(merge.a);
    const auto b = dendrogram.members(merge.b);
    const std::size_t ra = find(a.front());
    const std::size_t rb = find(b.front());
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] == n) {
      slot[r] = groups.size();
      groups.emplace_back();
    }
    groups[slot[r]].push_back(i);
  }
  return groups;
}

std::vector<std::size_t> representatives(const std::vector<std::vector<std::size_t>>& partition,
                                         const CodMatrix& matrix) {
  std::vector<std::size_t> out;
  for (const auto& cluster : partition) {
    if (cluster.empty()) throw std::invalid_argument("representatives: empty cluster");
    std::size_t best = cluster.front();
    double best_sum = std::numeric_limits<double>::infinity();
    for (const auto m : cluster) {
      double sum = 0.0;
      for (const auto o : cluster) sum += matrix.at(m, o);
      if (sum < best_sum || (sum == best_sum && m < best)) {
        best_sum = sum;
        best = m;
      }
    }
    out.push_back(best);
  }
  return out;
}

namespace {

void render(const Dendrogram& tree, std::size_t cluster, std::size_t depth, std::ostringstream& out) {
  const std::string indent(depth * 2, ' ');
  const std::size_t n = tree.leaves.size();
  if (cluster < n) {
    out << indent << tree.leaves[cluster] << '\n';
    return;
  }
  const auto& m = tree.merges[cluster - n];
  out << indent << "+ height=" << format_real(m.height) << " size=" << m.size << '\n';
  render(tree, m.a, depth + 1, out);
  render(tree, m.b, depth + 1, out);
}

}  // namespace

std::string dendrogram_text(const Dendrogram& dendrogram) {
  std::ostringstream out;
  const std::size_t n = dendrogram.leaves.size();
  if (dendrogram.merges.empty()) {
    for (std::size_t i = 0; i < n; ++i) render(dendrogram, i, 0, out);
  } else {
    render(dendrogram, n + dendrogram.merges.size() - 1, 0, out);
  }
  return out.str();
}

std::string dendrogram_csv(const Dendrogram& dendrogram) {
  std::ostringstream out;
  out << "leaf_a,leaf_b,height\n";
  for (const auto& m : dendrogram.merges) {
    out << dendrogram.leaves[dendrogram.members(m.a).front()] << ','
        << dendrogram.leaves[dendrogram.members(m.b).front()] << ',' << format_real(m.height) << '\n';
  }
  return out.str();
}

}  // namespace purgelab
