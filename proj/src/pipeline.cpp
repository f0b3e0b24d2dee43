// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include "dockwright/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "dockwright/errors.hpp"
#include "dockwright/logpipe.hpp"
#include "dockwright/search.hpp"

namespace dockwright::pipeline {

using nlohmann::json;

ClusteringArtifact cluster_corpus(std::span<const BuildRecord> records,
                                  const embed::EmbedderConfig& embedder,
                                  std::span<const cluster::ClusteringParams> grid,
                                  std::size_t tail_lines) {
  ClusteringArtifact art;
  art.tail_lines = tail_lines;
  art.dim = embedder.dim;
  art.embedder = embedder.kind == embed::EmbedderKind::Remote ? "remote" : "hashed";
  std::vector<logpipe::TokenSequence> seqs;
  for (const auto& r : records) {
    if (r.outcome != BuildOutcome::Failure) continue;
    art.record_ids.push_back(r.record_id);
    seqs.push_back(logpipe::record_tokens(r, tail_lines));
  }
  if (seqs.size() < 2) {
    art.assignment.labels.assign(seqs.size(), -1);
    return art;
  }
  auto points = embed::embed_all(seqs, embedder);
  if (!points.empty()) art.dim = points.front().dim();
  auto report = cluster::grid_search(points, grid);
  art.grid = std::move(report.evaluated);
  art.best = report.best;
  art.assignment = std::move(report.best_assignment);
  return art;
}

cluster::ClusterAssignment align(const ClusteringArtifact& artifact,
                                 std::span<const BuildRecord> records) {
  std::unordered_map<std::string, int> label_of;
  for (std::size_t i = 0; i < artifact.record_ids.size(); ++i)
    label_of[artifact.record_ids[i]] = artifact.assignment.labels.at(i);
  cluster::ClusterAssignment out;
  out.params = artifact.assignment.params;
  out.stabilities = artifact.assignment.stabilities;
  out.labels.reserve(records.size());
  for (const auto& r : records) {
    auto it = label_of.find(r.record_id);
    out.labels.push_back(it == label_of.end() ? -1 : it->second);
  }
  return out;
}

std::string artifact_to_json(const ClusteringArtifact& a) {
  json grid = json::array();
  for (const auto& g : a.grid)
    grid.push_back({{"min_cluster_size", g.params.min_cluster_size},
                    {"min_samples", g.params.min_samples},
                    {"clustered_fraction", g.clustered_fraction},
                    {"cluster_count", g.cluster_count},
                    {"skipped", g.skipped}});
  json doc = {{"record_ids", a.record_ids},
              {"labels", a.assignment.labels},
              {"stabilities", a.assignment.stabilities},
              {"params",
               {{"min_cluster_size", a.assignment.params.min_cluster_size},
                {"min_samples", a.assignment.params.min_samples}}},
              {"grid", grid},
              {"best", a.best},
              {"tail_lines", a.tail_lines},
              {"dim", a.dim},
              {"embedder", a.embedder}};
  return doc.dump(2) + "\n";
}

ClusteringArtifact artifact_from_json(std::string_view text) {
  ClusteringArtifact a;
  try {
    auto doc = json::parse(text);
    a.record_ids = doc.at("record_ids").get<std::vector<std::string>>();
    a.assignment.labels = doc.at("labels").get<std::vector<int>>();
    a.assignment.stabilities = doc.at("stabilities").get<std::vector<double>>();
    a.assignment.params.min_cluster_size = doc.at("params").at("min_cluster_size").get<std::size_t>();
    a.assignment.params.min_samples = doc.at("params").at("min_samples").get<std::size_t>();
    for (const auto& g : doc.at("grid")) {
      cluster::GridEntry e;
      e.params = {g.at("min_cluster_size").get<std::size_t>(), g.at("min_samples").get<std::size_t>()};
      e.clustered_fraction = g.at("clustered_fraction").get<double>();
      e.cluster_count = g.at("cluster_count").get<std::size_t>();
      e.skipped = g.at("skipped").get<bool>();
      a.grid.push_back(e);
    }
    a.best = doc.at("best").get<std::size_t>();
    a.tail_lines = doc.value("tail_lines", std::size_t{15});
    a.dim = doc.value("dim", std::size_t{0});
    a.embedder = doc.value("embedder", std::string("hashed"));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed clustering artifact: ") + e.what());
  }
  if (a.record_ids.size() != a.assignment.labels.size())
    throw ValidationError("clustering artifact: record_ids and labels differ in length");
  for (int label : a.assignment.labels)
    if (label < -1 || label >= static_cast<int>(a.assignment.stabilities.size()))
      throw ValidationError("clustering artifact: label " + std::to_string(label) +
                            " out of range");
  return a;
}

void save_artifact(const ClusteringArtifact& artifact, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << artifact_to_json(artifact);
    if (!out) throw IoError("error while writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

ClusteringArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read clustering artifact " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return artifact_from_json(buf.str());
}

std::vector<std::string> top_terms(std::span<const BuildRecord* const> members,
                                   std::size_t tail_lines, std::size_t n) {
  const auto& stops = search::stop_words();
  std::set<std::string_view> stop(stops.begin(), stops.end());
  std::map<std::string, std::size_t> counts;
  for (const auto* r : members) {
    auto seq = logpipe::record_tokens(*r, tail_lines);
    std::set<std::string> seen(seq.tokens.begin(), seq.tokens.end());
    for (const auto& t : seen) {
      if (t.size() < 2 || stop.count(t)) continue;
      if (std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); }))
        continue;
      ++counts[t];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < n; ++i) out.push_back(ranked[i].first);
  return out;
}

}  // namespace dockwright::pipeline
