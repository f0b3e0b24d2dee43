// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dockwright/cluster.hpp"
#include "dockwright/embed.hpp"

namespace dockwright {

inline constexpr std::uint16_t kDefaultPort = 7341;

struct SearchSettings {
  std::string url;
  std::vector<std::string> allowlist;
  double timeout_s = 20.0;
  std::size_t max_keywords = 12;
};

struct BuilderSettings {
  std::string engine = "docker";
  std::vector<std::string> extra_flags;
  std::size_t parallelism = 2;
  std::filesystem::path clone_root;
  std::vector<std::string> daemon_error_patterns;
  std::vector<std::string> trivial_kinds;
};

struct Config {
  std::filesystem::path corpus;
  std::filesystem::path rules;
  std::filesystem::path clusters;
  double timeout_s = 1800.0;
  std::size_t tail_lines = 15;
  embed::EmbedderConfig embedder;
  SearchSettings search;
  BuilderSettings builder;
  std::vector<cluster::ClusteringParams> grid;  // empty = default grid
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultPort;
};

/// Engine messages that mean the daemon, not the Dockerfile, failed.
const std::vector<std::string>& default_daemon_error_patterns();

/// Defaults with no file read.
Config default_config();

/// Parses a JSON config document. Relative paths resolve against `base_dir`.
/// Unknown keys and ill-typed values raise ConfigError.
Config config_from_json(std::string_view text, const std::filesystem::path& base_dir = {});

/// Reads a config file; IoError when unreadable, ConfigError when invalid.
Config load_config(const std::filesystem::path& path);

/// DOCKWRIGHT_ENGINE, DOCKWRIGHT_EMBEDDER_URL and DOCKWRIGHT_SEARCH_URL.
/// A non-empty embedder URL switches the embedder to the remote kind.
void apply_env(Config& cfg);

/// Parses "default" or "mcs:k,mcs:k,...". Throws ValidationError.
std::vector<cluster::ClusteringParams> parse_grid(std::string_view spec);

}  // namespace dockwright
