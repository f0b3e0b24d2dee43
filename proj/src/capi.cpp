// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include "dockwright/dockwright.h"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "dockwright/builder.hpp"
#include "dockwright/config.hpp"
#include "dockwright/corpus.hpp"
#include "dockwright/diff.hpp"
#include "dockwright/errors.hpp"
#include "dockwright/logpipe.hpp"
#include "dockwright/metrics.hpp"
#include "dockwright/pipeline.hpp"
#include "dockwright/rules.hpp"
#include "dockwright/search.hpp"
#include "dockwright/workbench.hpp"
#include "json_views.hpp"

using nlohmann::json;
namespace dw = dockwright;

struct dw_config {
  dw::Config cfg;
};
struct dw_corpus {
  dw::IngestResult data;
};
struct dw_rules {
  dw::rules::RuleDb db;
};
struct dw_clustering {
  dw::pipeline::ClusteringArtifact artifact;
};
struct dw_workbench {
  std::unique_ptr<dw::workbench::Workbench> wb;
};

namespace {

thread_local std::string last_error;

struct NotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BadArgument : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename F>
dw_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return DW_OK;
  } catch (const dw::ValidationError& e) {
    last_error = e.what();
    return DW_ERR_VALIDATION;
  } catch (const dw::IoError& e) {
    last_error = e.what();
    return DW_ERR_IO;
  } catch (const dw::ConfigError& e) {
    last_error = e.what();
    return DW_ERR_CONFIG;
  } catch (const dw::TransportError& e) {
    last_error = e.what();
    return DW_ERR_TRANSPORT;
  } catch (const dw::ProtocolError& e) {
    last_error = e.what();
    return DW_ERR_PROTOCOL;
  } catch (const dw::ApplicationError& e) {
    last_error = e.what();
    return DW_ERR_APPLICATION;
  } catch (const NotFound& e) {
    last_error = e.what();
    return DW_ERR_NOT_FOUND;
  } catch (const BadArgument& e) {
    last_error = e.what();
    return DW_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DW_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return DW_ERR_INTERNAL;
  }
}

void need(const void* p, const char* name) {
  if (!p) throw BadArgument(std::string(name) + " must not be NULL");
}

char* dup(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

const dw::BuildRecord& lookup(const dw_corpus* corpus, const char* record_id) {
  need(corpus, "corpus");
  need(record_id, "record_id");
  const auto* r = dw::find_record(corpus->data.records, record_id);
  if (!r) throw NotFound(std::string("no record '") + record_id + "' in the corpus");
  return *r;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw dw::ConfigError(key + " must be a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(std::stoull(v));
}

json stats_json(const dw::CorpusStats& s) {
  return {{"total", s.total},
          {"successes", s.successes},
          {"failures", s.failures},
          {"timeouts", s.timeouts},
          {"undetermined", s.undetermined},
          {"breakage_rate", s.breakage_rate}};
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw dw::IoError("cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

extern "C" {

const char* dw_version(void) { return "0.1.0"; }

const char* dw_status_name(dw_status status) {
  switch (status) {
    case DW_OK: return "ok";
    case DW_ERR_VALIDATION: return "validation error";
    case DW_ERR_IO: return "i/o error";
    case DW_ERR_CONFIG: return "configuration error";
    case DW_ERR_TRANSPORT: return "transport error";
    case DW_ERR_PROTOCOL: return "protocol error";
    case DW_ERR_APPLICATION: return "application error";
    case DW_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DW_ERR_NOT_FOUND: return "not found";
    case DW_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* dw_last_error(void) { return last_error.c_str(); }

void dw_string_free(char* s) { std::free(s); }

dw_status dw_config_load(const char* path, dw_config** out) {
  return guarded([&] {
    need(out, "out");
    auto h = std::make_unique<dw_config>();
    h->cfg = path ? dw::load_config(path) : dw::default_config();
    dw::apply_env(h->cfg);
    *out = h.release();
  });
}

dw_status dw_config_set(dw_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "cfg");
    need(key, "key");
    need(value, "value");
    std::string k = key, v = value;
    auto& c = cfg->cfg;
    if (k == "corpus") c.corpus = v;
    else if (k == "rules") c.rules = v;
    else if (k == "clusters") c.clusters = v;
    else if (k == "host") c.host = v;
    else if (k == "port") {
      auto p = to_size(k, v);
      if (p > 65535) throw dw::ConfigError("port out of range: " + v);
      c.port = static_cast<std::uint16_t>(p);
    } else if (k == "search_url") c.search.url = v;
    else if (k == "embedder_url") {
      c.embedder.remote_url = v;
      c.embedder.kind = v.empty() ? dw::embed::EmbedderKind::HashedNgram
                                  : dw::embed::EmbedderKind::Remote;
    } else if (k == "grid") {
      try {
        c.grid = dw::parse_grid(v);
      } catch (const dw::ValidationError& e) {
        throw dw::ConfigError(e.what());
      }
    } else if (k == "tail_lines") {
      c.tail_lines = to_size(k, v);
      if (c.tail_lines == 0) throw dw::ConfigError("tail_lines must be at least 1");
    } else if (k == "timeout_s") {
      char* end = nullptr;
      double t = std::strtod(v.c_str(), &end);
      if (v.empty() || *end || !(t > 0)) throw dw::ConfigError("timeout_s must be positive");
      c.timeout_s = t;
    } else if (k == "engine") c.builder.engine = v;
    else if (k == "parallelism") {
      c.builder.parallelism = to_size(k, v);
      if (c.builder.parallelism == 0) throw dw::ConfigError("parallelism must be at least 1");
    } else if (k == "clone_root") c.builder.clone_root = v;
    else throw dw::ConfigError("unknown config key '" + k + "'");
  });
}

void dw_config_free(dw_config* cfg) { delete cfg; }

dw_status dw_corpus_open(const char* path, dw_corpus** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto h = std::make_unique<dw_corpus>();
    h->data = dw::ingest_corpus(path);
    *out = h.release();
  });
}

dw_status dw_corpus_from_text(const char* text, size_t len, dw_corpus** out) {
  return guarded([&] {
    need(out, "out");
    if (len) need(text, "text");
    auto h = std::make_unique<dw_corpus>();
    h->data = dw::ingest_corpus_text(std::string_view(text ? text : "", len));
    *out = h.release();
  });
}

void dw_corpus_free(dw_corpus* corpus) { delete corpus; }

size_t dw_corpus_size(const dw_corpus* corpus) { return corpus ? corpus->data.records.size() : 0; }

dw_status dw_corpus_rejects_json(const dw_corpus* corpus, char** out) {
  return guarded([&] {
    need(corpus, "corpus");
    need(out, "out");
    json arr = json::array();
    for (const auto& r : corpus->data.rejects)
      arr.push_back({{"line", r.line_number}, {"reason", r.reason}});
    *out = dup(arr.dump());
  });
}

dw_status dw_corpus_stats_json(const dw_corpus* corpus, char** out) {
  return guarded([&] {
    need(corpus, "corpus");
    need(out, "out");
    *out = dup(stats_json(dw::corpus_stats(corpus->data.records)).dump());
  });
}

dw_status dw_corpus_record_json(const dw_corpus* corpus, const char* record_id, char** out) {
  return guarded([&] {
    need(out, "out");
    *out = dup(dw::format_record_line(lookup(corpus, record_id)));
  });
}

dw_status dw_corpus_save(const dw_corpus* corpus, const char* path) {
  return guarded([&] {
    need(corpus, "corpus");
    need(path, "path");
    dw::persist_corpus(corpus->data.records, path);
  });
}

dw_status dw_rules_builtin(dw_rules** out) {
  return guarded([&] {
    need(out, "out");
    auto h = std::make_unique<dw_rules>();
    h->db = dw::rules::builtin_rules();
    *out = h.release();
  });
}

dw_status dw_rules_load(const char* path, dw_rules** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto h = std::make_unique<dw_rules>();
    h->db = dw::rules::load_rules(path);
    *out = h.release();
  });
}

dw_status dw_rules_from_json(const char* text, dw_rules** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    auto h = std::make_unique<dw_rules>();
    h->db = dw::rules::rules_from_json(text);
    *out = h.release();
  });
}

dw_status dw_rules_save(dw_rules* rules, const char* path, uint64_t* new_version) {
  return guarded([&] {
    need(rules, "rules");
    need(path, "path");
    rules->db.version = dw::rules::save_rules(rules->db, path);
    if (new_version) *new_version = rules->db.version;
  });
}

dw_status dw_rules_to_json(const dw_rules* rules, char** out) {
  return guarded([&] {
    need(rules, "rules");
    need(out, "out");
    *out = dup(dw::rules::rules_to_json(rules->db));
  });
}

uint64_t dw_rules_version(const dw_rules* rules) { return rules ? rules->db.version : 0; }

void dw_rules_free(dw_rules* rules) { delete rules; }

dw_status dw_repair_record(const dw_corpus* corpus, const char* record_id, const dw_rules* rules,
                           const dw_config* cfg, char** out) {
  return guarded([&] {
    need(rules, "rules");
    need(out, "out");
    const auto& r = lookup(corpus, record_id);
    std::unique_ptr<dw::search::SearchClient> client;
    if (cfg && !cfg->cfg.search.url.empty())
      client = std::make_unique<dw::search::SearchClient>(
          cfg->cfg.search.url,
          cfg->cfg.search.allowlist.empty() ? dw::search::default_allowlist()
                                            : cfg->cfg.search.allowlist,
          cfg->cfg.search.timeout_s);
    auto outcome = dw::rules::repair(r, rules->db, client.get());
    auto body = dw::detail::outcome_json(r.dockerfile_text, r.dockerfile_path, outcome);
    body["record_id"] = r.record_id;
    body["rules_version"] = rules->db.version;
    *out = dup(body.dump());
  });
}

dw_status dw_diagnose(const char* dockerfile, const char* log, const dw_rules* rules,
                      char** out) {
  return guarded([&] {
    need(dockerfile, "dockerfile");
    need(log, "log");
    need(rules, "rules");
    need(out, "out");
    auto outcome = dw::rules::diagnose(dockerfile, log, rules->db);
    if (outcome.kind == dw::rules::OutcomeKind::SearchFallback)
      outcome.keywords = dw::search::extract_keywords(log);
    auto body = dw::detail::outcome_json(dockerfile, "Dockerfile", outcome);
    body["rules_version"] = rules->db.version;
    *out = dup(body.dump());
  });
}

dw_status dw_time_travel(const char* broken, const char* log, const char* developer,
                         const dw_rules* rules, char** out) {
  return guarded([&] {
    need(broken, "broken");
    need(log, "log");
    need(developer, "developer");
    need(rules, "rules");
    need(out, "out");
    auto v = dw::metrics::time_travel(broken, log, developer, rules->db);
    *out = dup(json{{"tag", std::string(dw::metrics::to_string(v.tag))}, {"detail", v.detail}}.dump());
  });
}

dw_status dw_unified_diff(const char* before, const char* after, const char* before_label,
                          const char* after_label, char** out) {
  return guarded([&] {
    need(before, "before");
    need(after, "after");
    need(out, "out");
    *out = dup(dw::diff::unified_diff(before, after, before_label ? before_label : "a",
                                      after_label ? after_label : "b"));
  });
}

dw_status dw_search_record(const dw_corpus* corpus, const char* record_id, const dw_config* cfg,
                           char** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    const auto& r = lookup(corpus, record_id);
    const auto& c = cfg->cfg;
    auto tail = dw::logpipe::tail_error_log(r.stderr_log, r.stdout_log, c.tail_lines);
    auto keywords = dw::search::extract_keywords(tail.text, c.search.max_keywords);
    json body = {{"record_id", r.record_id}, {"keywords", keywords}, {"query", ""},
                 {"results", json::array()}};
    if (!keywords.empty()) {
      auto query = dw::search::SearchQuery::from_keywords(keywords);
      body["query"] = query.query_string;
      dw::search::SearchClient client(
          c.search.url, c.search.allowlist.empty() ? dw::search::default_allowlist() : c.search.allowlist,
          c.search.timeout_s);
      for (const auto& s : client.top5(query)) body["results"].push_back(dw::detail::result_json(s));
    }
    *out = dup(body.dump());
  });
}

dw_status dw_cluster_corpus(const dw_corpus* corpus, const dw_config* cfg, dw_clustering** out) {
  return guarded([&] {
    need(corpus, "corpus");
    need(cfg, "cfg");
    need(out, "out");
    const auto& c = cfg->cfg;
    auto grid = c.grid.empty() ? dw::cluster::default_grid() : c.grid;
    auto h = std::make_unique<dw_clustering>();
    h->artifact = dw::pipeline::cluster_corpus(corpus->data.records, c.embedder, grid, c.tail_lines);
    *out = h.release();
  });
}

dw_status dw_clustering_load(const char* path, dw_clustering** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto h = std::make_unique<dw_clustering>();
    h->artifact = dw::pipeline::load_artifact(path);
    *out = h.release();
  });
}

dw_status dw_clustering_save(const dw_clustering* clustering, const char* path) {
  return guarded([&] {
    need(clustering, "clustering");
    need(path, "path");
    dw::pipeline::save_artifact(clustering->artifact, path);
  });
}

dw_status dw_clustering_to_json(const dw_clustering* clustering, char** out) {
  return guarded([&] {
    need(clustering, "clustering");
    need(out, "out");
    *out = dup(dw::pipeline::artifact_to_json(clustering->artifact));
  });
}

void dw_clustering_free(dw_clustering* clustering) { delete clustering; }

dw_status dw_report(const dw_corpus* corpus, const dw_clustering* clustering,
                    const dw_rules* rules, const char* what, const char* format, char** out) {
  return guarded([&] {
    need(corpus, "corpus");
    need(what, "what");
    need(out, "out");
    std::string w = what, f = format ? format : "text";
    if (f != "text" && f != "csv" && f != "json")
      throw BadArgument("format must be text, csv or json");
    const auto& records = corpus->data.records;
    if (w == "breakage") {
      auto s = dw::corpus_stats(records);
      if (f == "json") {
        *out = dup(stats_json(s).dump(2) + "\n");
      } else if (f == "csv") {
        *out = dup("total,successes,failures,timeouts,undetermined,breakage_rate\n" +
                   std::to_string(s.total) + "," + std::to_string(s.successes) + "," +
                   std::to_string(s.failures) + "," + std::to_string(s.timeouts) + "," +
                   std::to_string(s.undetermined) + "," + std::to_string(s.breakage_rate) + "\n");
      } else {
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "builds %zu: %zu success, %zu failure, %zu timeout, %zu undetermined\n"
                      "breakage rate %.2f%%\n",
                      s.total, s.successes, s.failures, s.timeouts, s.undetermined,
                      s.breakage_rate * 100);
        *out = dup(buf);
      }
      return;
    }
    need(clustering, "clustering");
    need(rules, "rules");
    auto assignment = dw::pipeline::align(clustering->artifact, records);
    if (w == "coverage") {
      auto rows = dw::metrics::repair_coverage(rules->db, assignment, records);
      if (f == "csv") {
        *out = dup(dw::metrics::coverage_csv(rows));
      } else if (f == "json") {
        json arr = json::array();
        for (const auto& r : rows)
          arr.push_back({{"rule_id", r.rule_id},
                         {"cluster_count", r.cluster_count},
                         {"parent_coverage", r.parent_coverage ? json(*r.parent_coverage) : json()},
                         {"average_coverage", r.average_coverage},
                         {"warning", r.warning}});
        *out = dup(arr.dump(2) + "\n");
      } else {
        *out = dup(dw::metrics::coverage_text(rows));
      }
    } else if (w == "proportions") {
      auto rows = dw::metrics::solution_proportions(rules->db, assignment, records);
      if (f == "csv") {
        *out = dup(dw::metrics::proportions_csv(rows));
      } else if (f == "json") {
        json arr = json::array();
        for (const auto& p : rows)
          arr.push_back({{"cluster_id", p.cluster_id},
                         {"size", p.size},
                         {"repaired_frac", p.repaired_frac},
                         {"suggested_frac", p.suggested_frac},
                         {"unknown_frac", p.unknown_frac}});
        *out = dup(arr.dump(2) + "\n");
      } else {
        *out = dup(dw::metrics::proportions_text(rows));
      }
    } else {
      throw BadArgument("report must be coverage, proportions or breakage");
    }
  });
}

dw_status dw_build_batch(const char* jobs_jsonl, const dw_config* cfg, const char* out_corpus,
                         char** out) {
  return guarded([&] {
    need(jobs_jsonl, "jobs_jsonl");
    need(cfg, "cfg");
    std::vector<dw::builder::BuildJob> jobs;
    std::istringstream lines(read_text(jobs_jsonl));
    std::string line;
    std::size_t n = 0;
    while (std::getline(lines, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        auto j = json::parse(line);
        dw::builder::BuildJob job;
        job.repo_ref = j.at("repo").get<std::string>();
        job.dockerfile_path = j.value("dockerfile_path", std::string("Dockerfile"));
        job.context_dir = j.value("context_dir", std::string());
        job.timeout_limit = j.value("timeout_s", cfg->cfg.timeout_s);
        job.record_id = j.value("id", std::string());
        jobs.push_back(std::move(job));
      } catch (const json::exception& e) {
        throw dw::ValidationError("jobs line " + std::to_string(n) + ": " + e.what());
      }
    }
    std::unique_ptr<dw::CorpusWriter> writer;
    if (out_corpus) writer = std::make_unique<dw::CorpusWriter>(out_corpus);
    auto records = dw::builder::run_batch(jobs, cfg->cfg.builder, writer.get());
    if (out) *out = dup(stats_json(dw::corpus_stats(records)).dump());
  });
}

dw_status dw_workbench_start(const dw_config* cfg, uint16_t port, dw_workbench** out,
                             uint16_t* bound_port) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    auto h = std::make_unique<dw_workbench>();
    h->wb = dw::workbench::Workbench::open(cfg->cfg);
    auto p = h->wb->start(cfg->cfg.host, port);
    if (bound_port) *bound_port = p;
    *out = h.release();
  });
}

dw_status dw_workbench_serve(const dw_config* cfg) {
  return guarded([&] {
    need(cfg, "cfg");
    auto wb = dw::workbench::Workbench::open(cfg->cfg);
    wb->serve(cfg->cfg.host, cfg->cfg.port);
  });
}

void dw_workbench_stop(dw_workbench* wb) { delete wb; }

}  // extern "C"
