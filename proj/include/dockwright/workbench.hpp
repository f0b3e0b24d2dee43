// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dockwright/config.hpp"
#include "dockwright/corpus.hpp"
#include "dockwright/pipeline.hpp"
#include "dockwright/rules.hpp"
#include "dockwright/search.hpp"

namespace httplib {
class Server;
}

namespace dockwright::workbench {

/// Status code plus JSON body.
struct Reply {
  int status = 200;
  std::string body;
};

/// State behind the HTTP API. Reads take snapshots (shared_ptr copies);
/// rule saves go through one writer lock, copy the db, persist it and then
/// publish the new snapshot.
class Workbench {
 public:
  Workbench(Config cfg, std::vector<BuildRecord> records, rules::RuleDb db,
            pipeline::ClusteringArtifact clusters);
  ~Workbench();

  Workbench(const Workbench&) = delete;
  Workbench& operator=(const Workbench&) = delete;

  /// Loads corpus (IoError when missing), rules (builtin when the configured
  /// file is absent) and clusters (computed and saved when absent).
  static std::unique_ptr<Workbench> open(const Config& cfg);

  Reply get_clusters() const;
  Reply get_cluster(const std::string& id) const;
  Reply get_record(const std::string& id) const;
  Reply get_rules() const;
  Reply post_dry_run(const std::string& body) const;
  Reply post_rules(const std::string& body);
  Reply get_search(const std::string& record_id) const;
  Reply post_repair(const std::string& record_id, const std::string& body) const;
  Reply post_recompute();

  std::uint64_t rules_version() const;
  bool stale() const { return stale_.load(); }
  /// Blocks until a running recompute job (if any) has finished.
  void wait_for_recompute();

  /// Binds and serves until stop(). Throws TransportError when the address
  /// cannot be bound. `port` 0 picks a free port; see bound_port().
  void serve(const std::string& host, std::uint16_t port);
  /// Binds, then serves on a background thread. Returns the bound port.
  std::uint16_t start(const std::string& host, std::uint16_t port);
  void stop();
  std::uint16_t bound_port() const { return bound_port_.load(); }

 private:
  void install_routes();
  std::shared_ptr<const rules::RuleDb> rules_snapshot() const;
  std::shared_ptr<const pipeline::ClusteringArtifact> clusters_snapshot() const;

  Config cfg_;
  std::shared_ptr<const std::vector<BuildRecord>> records_;
  std::map<std::string, std::size_t> record_index_;

  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const rules::RuleDb> rules_;
  std::shared_ptr<const pipeline::ClusteringArtifact> clusters_;

  std::mutex writer_mu_;
  std::atomic<bool> stale_{false};
  std::mutex job_mu_;
  std::thread job_;

  std::unique_ptr<search::SearchClient> search_;
  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
  std::atomic<std::uint16_t> bound_port_{0};
};

}  // namespace dockwright::workbench
