// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dockwright/embed.hpp"

namespace dockwright::cluster {

using embed::EmbeddingVector;

/// Point counts above this use streamed distances instead of a matrix.
inline constexpr std::size_t kMaterializeLimit = 4096;

/// Weights below this are clamped so that lambda = 1/weight stays finite.
inline constexpr double kMinWeight = 1e-12;

struct ClusteringParams {
  std::size_t min_cluster_size = 5;  // >= 2
  std::size_t min_samples = 5;       // k, >= 1

  bool operator==(const ClusteringParams&) const = default;
};

struct ClusterAssignment {
  std::vector<int> labels;          // -1 = noise, else 0..C-1
  std::vector<double> stabilities;  // indexed by label
  ClusteringParams params;

  std::size_t cluster_count() const { return stabilities.size(); }
  std::size_t noise_count() const;
  double clustered_fraction() const;
  std::vector<std::size_t> members(int label) const;
};

struct MstEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double weight = 0.0;

  bool operator==(const MstEdge&) const = default;
};

/// Distance from each point to its k-th nearest neighbour, the point itself
/// being the 0th. When k >= n the farthest point is used. Throws
/// ValidationError if k == 0 or k > n.
std::vector<double> core_distances(std::span<const EmbeddingVector> points, std::size_t k);

/// d(a,b) raised to the larger of the two core distances. Below
/// `materialize_limit` points the pairwise matrix is computed once.
class MutualReachability {
 public:
  MutualReachability(std::span<const EmbeddingVector> points, std::vector<double> cores,
                     std::size_t materialize_limit = kMaterializeLimit);

  double operator()(std::size_t a, std::size_t b) const;
  std::size_t size() const { return points_.size(); }
  bool materialized() const { return !matrix_.empty(); }
  const std::vector<double>& cores() const { return cores_; }

 private:
  std::span<const EmbeddingVector> points_;
  std::vector<double> cores_;
  std::vector<double> matrix_;
};

/// Prim's algorithm from point 0. Ties go to the lowest index, so the tree
/// is fully determined by the input order.
std::vector<MstEdge> build_mst(const MutualReachability& mreach);

/// Single-linkage hierarchy -> condensed tree -> excess-of-mass selection.
/// The root is kept as one cluster only when the condensed tree never splits.
/// Cluster ids are assigned by ascending smallest member index.
ClusterAssignment extract_clusters(std::size_t n_points, std::span<const MstEdge> mst,
                                   const ClusteringParams& params);

/// Throws ValidationError on invalid params (min_cluster_size < 2, k == 0,
/// k > n) or on inconsistent vector dimensions.
ClusterAssignment hdbscan(std::span<const EmbeddingVector> points,
                          const ClusteringParams& params,
                          std::size_t materialize_limit = kMaterializeLimit);

struct GridEntry {
  ClusteringParams params;
  double clustered_fraction = 0.0;
  std::size_t cluster_count = 0;
  bool skipped = false;  // params invalid for this point set
};

struct GridSearchReport {
  std::vector<GridEntry> evaluated;
  std::size_t best = 0;
  ClusterAssignment best_assignment;
};

/// min_cluster_size in {2,3,4,5,8,10,15,20} x k in {1,2,3,5,8}.
std::vector<ClusteringParams> default_grid();

/// Runs hdbscan per configuration and keeps the one with the largest
/// clustered fraction among configurations producing at least two clusters
/// (or among all, if none does). Ties prefer smaller min_cluster_size, then
/// smaller k. Throws ValidationError on an empty grid or when no entry is
/// valid for the point count.
GridSearchReport grid_search(std::span<const EmbeddingVector> points,
                             std::span<const ClusteringParams> grid);

/// Index of the winning entry under the selection rule above.
std::optional<std::size_t> select_best(std::span<const GridEntry> entries);

}  // namespace dockwright::cluster
