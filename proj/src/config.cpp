// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include "dockwright/config.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "dockwright/errors.hpp"
#include "dockwright/search.hpp"

namespace dockwright {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown config key '" + where + key + "'");
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + key + "' has the wrong type");
  }
}

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base) {
  std::filesystem::path path(p);
  if (path.empty() || path.is_absolute() || base.empty()) return path;
  return base / path;
}

std::string env(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

}  // namespace

const std::vector<std::string>& default_daemon_error_patterns() {
  static const std::vector<std::string> patterns = {
      "Cannot connect to the Docker daemon",
      "error during connect",
      "Error response from daemon: (?!.*(?:pull access denied|manifest unknown|not found))",
      "failed to create shim",
      "devmapper",
      "no space left on device",
      "i/o timeout",
      "TLS handshake timeout",
      "unexpected EOF",
      "connection reset by peer",
  };
  return patterns;
}

Config default_config() {
  Config cfg;
  cfg.search.allowlist = search::default_allowlist();
  cfg.builder.daemon_error_patterns = default_daemon_error_patterns();
  cfg.builder.trivial_kinds = {"COPY", "ADD"};
  cfg.builder.clone_root = std::filesystem::temp_directory_path() / "dockwright-clones";
  return cfg;
}

Config config_from_json(std::string_view text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Config cfg = default_config();
  check_keys(doc,
             {"corpus", "rules", "clusters", "timeout_s", "tail_lines", "embedder", "search",
              "builder", "grid", "host", "port"},
             "");
  if (doc.contains("corpus")) cfg.corpus = resolve(get<std::string>(doc, "corpus", ""), base_dir);
  if (doc.contains("rules")) cfg.rules = resolve(get<std::string>(doc, "rules", ""), base_dir);
  if (doc.contains("clusters"))
    cfg.clusters = resolve(get<std::string>(doc, "clusters", ""), base_dir);
  if (doc.contains("timeout_s")) cfg.timeout_s = get<double>(doc, "timeout_s", "");
  if (doc.contains("tail_lines")) cfg.tail_lines = get<std::size_t>(doc, "tail_lines", "");
  if (doc.contains("host")) cfg.host = get<std::string>(doc, "host", "");
  if (doc.contains("port")) {
    auto port = get<std::uint64_t>(doc, "port", "");
    if (port > 65535) throw ConfigError("port must be in 0..65535");
    cfg.port = static_cast<std::uint16_t>(port);
  }
  if (cfg.timeout_s <= 0) throw ConfigError("timeout_s must be positive");
  if (cfg.tail_lines == 0) throw ConfigError("tail_lines must be at least 1");

  if (doc.contains("embedder")) {
    const auto& e = doc["embedder"];
    const std::string w = "embedder.";
    check_keys(e, {"kind", "dim", "ngram_min", "ngram_max", "word_unigrams", "url", "timeout_s"},
               w);
    if (e.contains("kind")) {
      auto kind = get<std::string>(e, "kind", w);
      if (kind == "hashed")
        cfg.embedder.kind = embed::EmbedderKind::HashedNgram;
      else if (kind == "remote")
        cfg.embedder.kind = embed::EmbedderKind::Remote;
      else
        throw ConfigError("embedder.kind must be \"hashed\" or \"remote\"");
    }
    if (e.contains("dim")) cfg.embedder.dim = get<std::size_t>(e, "dim", w);
    if (e.contains("ngram_min")) cfg.embedder.ngram_min = get<std::size_t>(e, "ngram_min", w);
    if (e.contains("ngram_max")) cfg.embedder.ngram_max = get<std::size_t>(e, "ngram_max", w);
    if (e.contains("word_unigrams"))
      cfg.embedder.include_word_unigrams = get<bool>(e, "word_unigrams", w);
    if (e.contains("url")) cfg.embedder.remote_url = get<std::string>(e, "url", w);
    if (e.contains("timeout_s")) cfg.embedder.remote_timeout_s = get<double>(e, "timeout_s", w);
    try {
      cfg.embedder.validate();
    } catch (const ValidationError& err) {
      throw ConfigError(err.what());
    }
  }
  if (doc.contains("search")) {
    const auto& s = doc["search"];
    const std::string w = "search.";
    check_keys(s, {"url", "allowlist", "timeout_s", "max_keywords"}, w);
    if (s.contains("url")) cfg.search.url = get<std::string>(s, "url", w);
    if (s.contains("allowlist"))
      cfg.search.allowlist = get<std::vector<std::string>>(s, "allowlist", w);
    if (s.contains("timeout_s")) cfg.search.timeout_s = get<double>(s, "timeout_s", w);
    if (s.contains("max_keywords"))
      cfg.search.max_keywords = get<std::size_t>(s, "max_keywords", w);
    if (cfg.search.max_keywords == 0 || cfg.search.max_keywords > 12)
      throw ConfigError("search.max_keywords must be in 1..12");
  }
  if (doc.contains("builder")) {
    const auto& b = doc["builder"];
    const std::string w = "builder.";
    check_keys(b,
               {"engine", "extra_flags", "parallelism", "clone_root", "daemon_error_patterns",
                "trivial_kinds"},
               w);
    if (b.contains("engine")) cfg.builder.engine = get<std::string>(b, "engine", w);
    if (b.contains("extra_flags"))
      cfg.builder.extra_flags = get<std::vector<std::string>>(b, "extra_flags", w);
    if (b.contains("parallelism")) cfg.builder.parallelism = get<std::size_t>(b, "parallelism", w);
    if (b.contains("clone_root"))
      cfg.builder.clone_root = resolve(get<std::string>(b, "clone_root", w), base_dir);
    if (b.contains("daemon_error_patterns"))
      cfg.builder.daemon_error_patterns =
          get<std::vector<std::string>>(b, "daemon_error_patterns", w);
    if (b.contains("trivial_kinds"))
      cfg.builder.trivial_kinds = get<std::vector<std::string>>(b, "trivial_kinds", w);
    if (cfg.builder.parallelism == 0) throw ConfigError("builder.parallelism must be at least 1");
  }
  if (doc.contains("grid")) {
    if (doc["grid"].is_string()) {
      try {
        cfg.grid = parse_grid(doc["grid"].get<std::string>());
      } catch (const ValidationError& e) {
        throw ConfigError(e.what());
      }
    } else if (doc["grid"].is_array()) {
      for (const auto& g : doc["grid"]) {
        if (!g.is_array() || g.size() != 2 || !g[0].is_number_unsigned() ||
            !g[1].is_number_unsigned())
          throw ConfigError("grid entries must be [min_cluster_size, min_samples]");
        cfg.grid.push_back({g[0].get<std::size_t>(), g[1].get<std::size_t>()});
      }
    } else {
      throw ConfigError("grid must be \"default\" or an array of pairs");
    }
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str(), path.parent_path());
}

void apply_env(Config& cfg) {
  if (auto v = env("DOCKWRIGHT_ENGINE"); !v.empty()) cfg.builder.engine = v;
  if (auto v = env("DOCKWRIGHT_EMBEDDER_URL"); !v.empty()) {
    cfg.embedder.remote_url = v;
    cfg.embedder.kind = embed::EmbedderKind::Remote;
  }
  if (auto v = env("DOCKWRIGHT_SEARCH_URL"); !v.empty()) cfg.search.url = v;
}

std::vector<cluster::ClusteringParams> parse_grid(std::string_view spec) {
  if (spec == "default") return cluster::default_grid();
  std::vector<cluster::ClusteringParams> grid;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    auto comma = spec.find(',', pos);
    auto item = spec.substr(pos, comma == std::string_view::npos ? spec.npos : comma - pos);
    auto colon = item.find(':');
    if (colon == std::string_view::npos)
      throw ValidationError("grid item '" + std::string(item) + "' is not mcs:k");
    auto number = [&](std::string_view s) {
      if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos)
        throw ValidationError("grid item '" + std::string(item) + "' is not mcs:k");
      return static_cast<std::size_t>(std::stoull(std::string(s)));
    };
    grid.push_back({number(item.substr(0, colon)), number(item.substr(colon + 1))});
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return grid;
}

}  // namespace dockwright
