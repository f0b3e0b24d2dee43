// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include "dockwright/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <thread>

#include "dockwright/errors.hpp"

namespace dockwright::cluster {

namespace {

double euclid(const EmbeddingVector& a, const EmbeddingVector& b) {
  double s = 0.0;
  const auto* pa = a.values.data();
  const auto* pb = b.values.data();
  for (std::size_t i = 0, d = a.values.size(); i < d; ++i) {
    double t = pa[i] - pb[i];
    s += t * t;
  }
  return std::sqrt(s);
}

void check_dims(std::span<const EmbeddingVector> points) {
  for (const auto& p : points)
    if (p.dim() != points.front().dim())
      throw ValidationError("points have inconsistent dimensions");
}

std::size_t tri_index(std::size_t i, std::size_t j, std::size_t n) {
  if (i > j) std::swap(i, j);
  // row-major strict upper triangle
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

// Pairwise Euclidean distances, materialized below the limit and computed on
// demand above it.
class Distances {
 public:
  Distances(std::span<const EmbeddingVector> points, std::size_t limit) : points_(points) {
    auto n = points.size();
    if (n >= 2 && n <= limit) {
      tri_.resize(n * (n - 1) / 2);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) tri_[tri_index(i, j, n)] = euclid(points[i], points[j]);
    }
  }

  double operator()(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    if (!tri_.empty()) return tri_[tri_index(i, j, points_.size())];
    return euclid(points_[i], points_[j]);
  }
  std::size_t size() const { return points_.size(); }
  bool materialized() const { return !tri_.empty(); }
  std::span<const EmbeddingVector> points() const { return points_; }

 private:
  std::span<const EmbeddingVector> points_;
  std::vector<double> tri_;
};

template <typename Fn>
void parallel_rows(std::size_t n, Fn&& fn) {
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (n < 512 || workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  workers = std::min<unsigned>(workers, 16);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::vector<double> core_from(const Distances& dist, std::size_t k) {
  auto n = dist.size();
  if (k == 0) throw ValidationError("min_samples k must be >= 1");
  if (k > n)
    throw ValidationError("min_samples k=" + std::to_string(k) + " exceeds point count " +
                          std::to_string(n));
  std::vector<double> cores(n, 0.0);
  if (n < 2) return cores;
  auto rank = std::min(k, n - 1);
  parallel_rows(n, [&](std::size_t i) {
    std::vector<double> row(n);
    for (std::size_t j = 0; j < n; ++j) row[j] = dist(i, j);
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(rank), row.end());
    cores[i] = row[rank];
  });
  return cores;
}

std::vector<MstEdge> prim(std::size_t n, const auto& weight) {
  std::vector<MstEdge> edges;
  if (n < 2) return edges;
  edges.reserve(n - 1);
  constexpr auto kInf = std::numeric_limits<double>::infinity();
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<double> best(n, kInf);
  std::vector<std::size_t> from(n, kNone);
  std::vector<char> in_tree(n, 0);
  std::size_t current = 0;
  in_tree[0] = 1;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = kNone;
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      double w = weight(current, v);
      if (w < best[v] || (w == best[v] && current < from[v])) {
        best[v] = w;
        from[v] = current;
      }
      if (next == kNone || best[v] < best[next]) next = v;
    }
    in_tree[next] = 1;
    edges.push_back({from[next], next, best[next]});
    current = next;
  }
  return edges;
}

struct Condensed {
  struct Entry {
    int parent;         // cluster id
    std::size_t child;  // point index or cluster id
    bool child_is_cluster;
    double lambda;
    std::size_t size;
  };
  std::vector<Entry> entries;
  std::vector<double> birth;
  std::vector<int> parent;  // per cluster, -1 for root
};

Condensed condense(std::size_t n, std::span<const MstEdge> mst, std::size_t min_cluster_size) {
  std::vector<MstEdge> sorted(mst.begin(), mst.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const MstEdge& x, const MstEdge& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    auto xa = std::min(x.a, x.b), ya = std::min(y.a, y.b);
    if (xa != ya) return xa < ya;
    return std::max(x.a, x.b) < std::max(y.a, y.b);
  });

  // Single-linkage dendrogram: leaves 0..n-1, merges n..2n-2.
  std::size_t total = 2 * n - 1;
  std::vector<std::size_t> left(total, 0), right(total, 0), size(total, 1);
  std::vector<double> height(total, 0.0);
  std::vector<std::size_t> uf(total);
  std::iota(uf.begin(), uf.end(), 0);
  auto find = [&](std::size_t x) {
    while (uf[x] != x) {
      uf[x] = uf[uf[x]];
      x = uf[x];
    }
    return x;
  };
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    auto node = n + i;
    auto ra = find(sorted[i].a), rb = find(sorted[i].b);
    left[node] = ra;
    right[node] = rb;
    height[node] = sorted[i].weight;
    size[node] = size[ra] + size[rb];
    uf[ra] = node;
    uf[rb] = node;
  }

  Condensed out;
  std::vector<int> relabel(total, -1);
  auto root = total - 1;
  relabel[root] = 0;
  out.birth.push_back(0.0);
  out.parent.push_back(-1);

  auto fall_out = [&](std::size_t subtree, int cluster, double lambda) {
    std::vector<std::size_t> stack{subtree};
    while (!stack.empty()) {
      auto x = stack.back();
      stack.pop_back();
      if (x < n) {
        out.entries.push_back({cluster, x, false, lambda, 1});
      } else {
        stack.push_back(right[x]);
        stack.push_back(left[x]);
      }
    }
  };

  std::vector<std::size_t> work{root};
  while (!work.empty()) {
    auto node = work.back();
    work.pop_back();
    if (node < n) continue;
    int cluster = relabel[node];
    double lambda = 1.0 / std::max(height[node], kMinWeight);
    // Merges at the same height form one n-ary split, so the result does not
    // depend on how ties were ordered when building the dendrogram.
    std::vector<std::size_t> parts, pending{right[node], left[node]};
    while (!pending.empty()) {
      auto x = pending.back();
      pending.pop_back();
      if (x >= n && height[x] == height[node]) {
        pending.push_back(right[x]);
        pending.push_back(left[x]);
      } else {
        parts.push_back(x);
      }
    }
    std::size_t big = 0;
    for (auto p : parts) big += size[p] >= min_cluster_size;
    for (auto p : parts) {
      if (size[p] < min_cluster_size) {
        fall_out(p, cluster, lambda);
      } else if (big == 1) {
        relabel[p] = cluster;
        work.push_back(p);
      } else {
        int id = static_cast<int>(out.birth.size());
        out.birth.push_back(lambda);
        out.parent.push_back(cluster);
        out.entries.push_back({cluster, static_cast<std::size_t>(id), true, lambda, size[p]});
        relabel[p] = id;
        work.push_back(p);
      }
    }
  }
  return out;
}

}  // namespace

std::size_t ClusterAssignment::noise_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), -1));
}

double ClusterAssignment::clustered_fraction() const {
  if (labels.empty()) return 0.0;
  return static_cast<double>(labels.size() - noise_count()) / static_cast<double>(labels.size());
}

std::vector<std::size_t> ClusterAssignment::members(int label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) out.push_back(i);
  return out;
}

std::vector<double> core_distances(std::span<const EmbeddingVector> points, std::size_t k) {
  check_dims(points);
  Distances dist(points, 0);
  return core_from(dist, k);
}

MutualReachability::MutualReachability(std::span<const EmbeddingVector> points,
                                       std::vector<double> cores,
                                       std::size_t materialize_limit)
    : points_(points), cores_(std::move(cores)) {
  if (cores_.size() != points_.size())
    throw ValidationError("core distance count does not match point count");
  auto n = points_.size();
  if (n >= 2 && n <= materialize_limit) {
    matrix_.resize(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        matrix_[tri_index(i, j, n)] =
            std::max({cores_[i], cores_[j], euclid(points_[i], points_[j])});
  }
}

double MutualReachability::operator()(std::size_t a, std::size_t b) const {
  if (a == b) return cores_[a];
  if (!matrix_.empty()) return matrix_[tri_index(a, b, points_.size())];
  return std::max({cores_[a], cores_[b], euclid(points_[a], points_[b])});
}

std::vector<MstEdge> build_mst(const MutualReachability& mreach) {
  return prim(mreach.size(), mreach);
}

ClusterAssignment extract_clusters(std::size_t n, std::span<const MstEdge> mst,
                                   const ClusteringParams& params) {
  ClusterAssignment result;
  result.params = params;
  result.labels.assign(n, -1);
  if (params.min_cluster_size < 2) throw ValidationError("min_cluster_size must be >= 2");
  if (n < params.min_cluster_size) return result;
  if (mst.size() + 1 != n) throw ValidationError("MST must have n-1 edges");

  auto tree = condense(n, mst, params.min_cluster_size);
  auto clusters = tree.birth.size();

  std::vector<double> stability(clusters, 0.0);
  std::vector<std::vector<std::size_t>> children(clusters);
  std::vector<int> point_home(n, -1);
  for (const auto& e : tree.entries) {
    stability[e.parent] +=
        (e.lambda - tree.birth[e.parent]) * static_cast<double>(e.size);
    if (e.child_is_cluster)
      children[e.parent].push_back(e.child);
    else
      point_home[e.child] = e.parent;
  }

  // Excess of mass, children before parents (children have larger ids).
  // The root competes only when it never splits; otherwise a single
  // all-points cluster would win whenever the split happens late.
  std::vector<char> selected(clusters, 0);
  std::vector<double> subtree(clusters, 0.0);
  for (std::size_t c = clusters; c-- > 0;) {
    if (children[c].empty()) {
      selected[c] = 1;
      subtree[c] = stability[c];
      continue;
    }
    double sum = 0.0;
    for (auto ch : children[c]) sum += subtree[ch];
    if (c != 0 && stability[c] >= sum) {
      selected[c] = 1;
      subtree[c] = stability[c];
    } else {
      subtree[c] = sum;
    }
  }
  // A selected cluster shadows everything beneath it.
  std::vector<char> chosen(clusters, 0);
  for (std::size_t c = 0; c < clusters; ++c) {
    bool shadowed = false;
    for (int p = tree.parent[c]; p >= 0; p = tree.parent[p])
      if (selected[p]) {
        shadowed = true;
        break;
      }
    chosen[c] = selected[c] && !shadowed;
  }

  std::vector<int> owner(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = point_home[i]; c >= 0; c = tree.parent[c]) {
      if (chosen[c]) {
        owner[i] = c;
        break;
      }
    }
  }

  std::map<int, std::size_t> first_member;
  for (std::size_t i = 0; i < n; ++i)
    if (owner[i] >= 0 && !first_member.count(owner[i])) first_member[owner[i]] = i;
  std::vector<std::pair<std::size_t, int>> order;
  for (auto [c, idx] : first_member) order.emplace_back(idx, c);
  std::sort(order.begin(), order.end());
  std::map<int, int> final_id;
  for (std::size_t i = 0; i < order.size(); ++i) {
    final_id[order[i].second] = static_cast<int>(i);
    result.stabilities.push_back(stability[order[i].second]);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (owner[i] >= 0) result.labels[i] = final_id[owner[i]];
  return result;
}

namespace {

void check_params(std::size_t n, const ClusteringParams& p) {
  if (p.min_cluster_size < 2) throw ValidationError("min_cluster_size must be >= 2");
  if (p.min_samples == 0) throw ValidationError("min_samples k must be >= 1");
  if (p.min_samples > n)
    throw ValidationError("min_samples k=" + std::to_string(p.min_samples) +
                          " exceeds point count " + std::to_string(n));
}

std::vector<MstEdge> mst_for(const Distances& dist, const std::vector<double>& cores) {
  return prim(dist.size(), [&](std::size_t a, std::size_t b) {
    return std::max({cores[a], cores[b], dist(a, b)});
  });
}

}  // namespace

ClusterAssignment hdbscan(std::span<const EmbeddingVector> points,
                          const ClusteringParams& params, std::size_t materialize_limit) {
  check_dims(points);
  check_params(points.size(), params);
  Distances dist(points, materialize_limit);
  auto cores = core_from(dist, params.min_samples);
  auto mst = mst_for(dist, cores);
  return extract_clusters(points.size(), mst, params);
}

std::vector<ClusteringParams> default_grid() {
  std::vector<ClusteringParams> grid;
  for (std::size_t mcs : {2, 3, 4, 5, 8, 10, 15, 20})
    for (std::size_t k : {1, 2, 3, 5, 8}) grid.push_back({mcs, k});
  return grid;
}

std::optional<std::size_t> select_best(std::span<const GridEntry> entries) {
  bool any_multi = std::any_of(entries.begin(), entries.end(), [](const GridEntry& e) {
    return !e.skipped && e.cluster_count >= 2;
  });
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.skipped || (any_multi && e.cluster_count < 2)) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = entries[*best];
    if (e.clustered_fraction != b.clustered_fraction) {
      if (e.clustered_fraction > b.clustered_fraction) best = i;
      continue;
    }
    if (e.params.min_cluster_size != b.params.min_cluster_size) {
      if (e.params.min_cluster_size < b.params.min_cluster_size) best = i;
      continue;
    }
    if (e.params.min_samples < b.params.min_samples) best = i;
  }
  return best;
}

GridSearchReport grid_search(std::span<const EmbeddingVector> points,
                             std::span<const ClusteringParams> grid) {
  if (grid.empty()) throw ValidationError("grid must not be empty");
  check_dims(points);
  Distances dist(points, kMaterializeLimit);
  std::map<std::size_t, std::vector<MstEdge>> mst_by_k;

  GridSearchReport report;
  std::vector<ClusterAssignment> assignments;
  for (const auto& params : grid) {
    GridEntry entry;
    entry.params = params;
    try {
      check_params(points.size(), params);
    } catch (const ValidationError&) {
      entry.skipped = true;
      report.evaluated.push_back(entry);
      assignments.emplace_back();
      continue;
    }
    auto it = mst_by_k.find(params.min_samples);
    if (it == mst_by_k.end()) {
      auto cores = core_from(dist, params.min_samples);
      it = mst_by_k.emplace(params.min_samples, mst_for(dist, cores)).first;
    }
    auto a = extract_clusters(points.size(), it->second, params);
    entry.clustered_fraction = a.clustered_fraction();
    entry.cluster_count = a.cluster_count();
    report.evaluated.push_back(entry);
    assignments.push_back(std::move(a));
  }
  auto best = select_best(report.evaluated);
  if (!best) throw ValidationError("no grid configuration is valid for these points");
  report.best = *best;
  report.best_assignment = std::move(assignments[*best]);
  return report;
}

}  // namespace dockwright::cluster
