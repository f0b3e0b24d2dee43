// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dockwright/cluster.hpp"
#include "dockwright/corpus.hpp"
#include "dockwright/embed.hpp"

namespace dockwright::pipeline {

/// Clustering of a corpus's failing records, keyed by record id.
struct ClusteringArtifact {
  std::vector<std::string> record_ids;  // failing records, in corpus order
  cluster::ClusterAssignment assignment;
  std::vector<cluster::GridEntry> grid;
  std::size_t best = 0;
  std::size_t tail_lines = 15;
  std::size_t dim = 0;
  std::string embedder;  // "hashed" or "remote"
};

/// Embeds the log tail of every Failure record and grid-searches HDBSCAN.
/// Fewer than two failures yield an all-noise artifact with an empty grid.
ClusteringArtifact cluster_corpus(std::span<const BuildRecord> records,
                                  const embed::EmbedderConfig& embedder,
                                  std::span<const cluster::ClusteringParams> grid,
                                  std::size_t tail_lines);

/// Labels for `records` (one per record; -1 when the record is absent from
/// the artifact or unclustered).
cluster::ClusterAssignment align(const ClusteringArtifact& artifact,
                                 std::span<const BuildRecord> records);

std::string artifact_to_json(const ClusteringArtifact& artifact);
ClusteringArtifact artifact_from_json(std::string_view text);
void save_artifact(const ClusteringArtifact& artifact, const std::filesystem::path& path);
ClusteringArtifact load_artifact(const std::filesystem::path& path);

/// Log-tail tokens shared by the most `members`, skipping stop-words and
/// numbers. Ties are broken alphabetically.
std::vector<std::string> top_terms(std::span<const BuildRecord* const> members,
                                   std::size_t tail_lines, std::size_t n = 5);

}  // namespace dockwright::pipeline
