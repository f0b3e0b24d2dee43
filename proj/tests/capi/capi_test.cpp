// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

// Links only the shared library and sees only the C header.

#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include "dockwright/dockwright.h"

extern "C" int dw_header_check_c(void);

using nlohmann::json;

namespace {

std::string fixture(const char* name) { return std::string(DW_FIXTURE_DIR) + "/" + name; }

// Takes ownership of a dw_string.
std::string take(char* s) {
  std::string out = s ? s : "";
  dw_string_free(s);
  return out;
}

struct CorpusGuard {
  dw_corpus* p = nullptr;
  ~CorpusGuard() { dw_corpus_free(p); }
};
struct RulesGuard {
  dw_rules* p = nullptr;
  ~RulesGuard() { dw_rules_free(p); }
};
struct ConfigGuard {
  dw_config* p = nullptr;
  ~ConfigGuard() { dw_config_free(p); }
};
struct ClusteringGuard {
  dw_clustering* p = nullptr;
  ~ClusteringGuard() { dw_clustering_free(p); }
};

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() /
         ("dwcapi-" + std::to_string(::getpid()) + "-" + name);
}

}  // namespace

TEST(CApi, HeaderCompilesAsC) { EXPECT_EQ(dw_header_check_c(), 0); }

TEST(CApi, StatusNamesAndVersion) {
  EXPECT_STREQ(dw_status_name(DW_OK), "ok");
  EXPECT_STREQ(dw_status_name(DW_ERR_NOT_FOUND), "not found");
  EXPECT_STRNE(dw_version(), "");
  dw_string_free(nullptr);
}

TEST(CApi, NullArgumentsAreRejected) {
  EXPECT_EQ(dw_corpus_open(nullptr, nullptr), DW_ERR_INVALID_ARGUMENT);
  EXPECT_STRNE(dw_last_error(), "");
  EXPECT_EQ(dw_rules_builtin(nullptr), DW_ERR_INVALID_ARGUMENT);
  char* out = nullptr;
  EXPECT_EQ(dw_diagnose(nullptr, "", nullptr, &out), DW_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(out, nullptr);
}

TEST(CApi, CorpusLifecycle) {
  CorpusGuard c;
  EXPECT_EQ(dw_corpus_open("/nonexistent/corpus.jsonl", &c.p), DW_ERR_IO);
  ASSERT_EQ(dw_corpus_open(fixture("with_rejects.jsonl").c_str(), &c.p), DW_OK);
  EXPECT_EQ(dw_corpus_size(c.p), 2u);
  char* out = nullptr;
  ASSERT_EQ(dw_corpus_rejects_json(c.p, &out), DW_OK);
  auto rejects = json::parse(take(out));
  ASSERT_EQ(rejects.size(), 1u);
  EXPECT_EQ(rejects[0]["line"], 3);
  ASSERT_EQ(dw_corpus_stats_json(c.p, &out), DW_OK);
  EXPECT_EQ(json::parse(take(out))["total"], 2);
  EXPECT_EQ(dw_corpus_record_json(c.p, "missing", &out), DW_ERR_NOT_FOUND);

  CorpusGuard dup;
  std::ifstream in(fixture("with_rejects.jsonl"));
  std::string line;
  std::getline(in, line);
  std::string text = line + "\n" + line + "\n";
  EXPECT_EQ(dw_corpus_from_text(text.data(), text.size(), &dup.p), DW_ERR_VALIDATION);
}

TEST(CApi, RulesRoundTrip) {
  RulesGuard r;
  ASSERT_EQ(dw_rules_builtin(&r.p), DW_OK);
  char* out = nullptr;
  ASSERT_EQ(dw_rules_to_json(r.p, &out), DW_OK);
  auto doc = take(out);
  RulesGuard back;
  ASSERT_EQ(dw_rules_from_json(doc.c_str(), &back.p), DW_OK);
  auto path = temp_path("rules.json");
  uint64_t v = 0;
  ASSERT_EQ(dw_rules_save(back.p, path.c_str(), &v), DW_OK);
  EXPECT_EQ(v, dw_rules_version(r.p) + 1);
  EXPECT_EQ(dw_rules_version(back.p), v);
  RulesGuard loaded;
  ASSERT_EQ(dw_rules_load(path.c_str(), &loaded.p), DW_OK);
  EXPECT_EQ(dw_rules_version(loaded.p), v);
  std::filesystem::remove(path);
  RulesGuard bad;
  EXPECT_EQ(dw_rules_from_json("{\"repairs\": 3}", &bad.p), DW_ERR_VALIDATION);
}

TEST(CApi, RepairDiagnoseTimeTravelDiff) {
  CorpusGuard c;
  ASSERT_EQ(dw_corpus_open(fixture("demo.jsonl").c_str(), &c.p), DW_OK);
  RulesGuard r;
  ASSERT_EQ(dw_rules_builtin(&r.p), DW_OK);
  char* out = nullptr;
  ASSERT_EQ(dw_repair_record(c.p, "r6", r.p, nullptr, &out), DW_OK);
  auto rep = json::parse(take(out));
  EXPECT_EQ(rep["kind"], "repaired");
  ASSERT_EQ(rep["variants"].size(), 1u);
  EXPECT_EQ(rep["variants"][0]["text"].get<std::string>().substr(0, 16), "FROM ruby:2.6.5\n");
  EXPECT_EQ(dw_repair_record(c.p, "ok-1", r.p, nullptr, &out), DW_ERR_VALIDATION);
  EXPECT_EQ(dw_repair_record(c.p, "nope", r.p, nullptr, &out), DW_ERR_NOT_FOUND);

  ASSERT_EQ(dw_diagnose("FROM node:14\nRUN npm run build\n", "npm ERR! code ELIFECYCLE", r.p, &out),
            DW_OK);
  EXPECT_EQ(json::parse(take(out))["kind"], "suggested");

  ASSERT_EQ(dw_time_travel("FROM ruby:2.6.3\n", "Your Ruby version is 2.6.3, but your Gemfile specified 2.6.5",
                           "FROM ruby:2.6.5\n", r.p, &out),
            DW_OK);
  EXPECT_EQ(json::parse(take(out))["tag"], "identical_repair");

  ASSERT_EQ(dw_unified_diff("a\n", "b\n", "x", "y", &out), DW_OK);
  EXPECT_EQ(take(out), "--- x\n+++ y\n@@ -1 +1 @@\n-a\n+b\n");
}

TEST(CApi, ConfigClusterReport) {
  ConfigGuard cfg;
  ASSERT_EQ(dw_config_load(nullptr, &cfg.p), DW_OK);
  EXPECT_EQ(dw_config_set(cfg.p, "grid", "3:3"), DW_OK);
  EXPECT_EQ(dw_config_set(cfg.p, "grid", "3"), DW_ERR_CONFIG);
  EXPECT_EQ(dw_config_set(cfg.p, "colour", "red"), DW_ERR_CONFIG);
  EXPECT_EQ(dw_config_set(cfg.p, "port", "99999"), DW_ERR_CONFIG);

  CorpusGuard c;
  ASSERT_EQ(dw_corpus_open(fixture("two_blob.jsonl").c_str(), &c.p), DW_OK);
  ClusteringGuard cl;
  ASSERT_EQ(dw_cluster_corpus(c.p, cfg.p, &cl.p), DW_OK);
  char* out = nullptr;
  ASSERT_EQ(dw_clustering_to_json(cl.p, &out), DW_OK);
  auto art = json::parse(take(out));
  EXPECT_EQ(art["stabilities"].size(), 2u);

  auto path = temp_path("clusters.json");
  ASSERT_EQ(dw_clustering_save(cl.p, path.c_str()), DW_OK);
  ClusteringGuard back;
  ASSERT_EQ(dw_clustering_load(path.c_str(), &back.p), DW_OK);
  std::filesystem::remove(path);

  RulesGuard r;
  ASSERT_EQ(dw_rules_builtin(&r.p), DW_OK);
  ASSERT_EQ(dw_report(c.p, back.p, r.p, "coverage", "json", &out), DW_OK);
  EXPECT_TRUE(json::parse(take(out)).is_array());
  ASSERT_EQ(dw_report(c.p, nullptr, nullptr, "breakage", "text", &out), DW_OK);
  EXPECT_NE(take(out).find("breakage rate"), std::string::npos);
  EXPECT_EQ(dw_report(c.p, back.p, r.p, "everything", "text", &out), DW_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(dw_report(c.p, nullptr, r.p, "coverage", "text", &out), DW_ERR_INVALID_ARGUMENT);
}

TEST(CApi, WorkbenchStartStop) {
  ConfigGuard cfg;
  ASSERT_EQ(dw_config_load(nullptr, &cfg.p), DW_OK);
  auto dir = temp_path("wb");
  std::filesystem::create_directories(dir);
  ASSERT_EQ(dw_config_set(cfg.p, "corpus", fixture("demo.jsonl").c_str()), DW_OK);
  ASSERT_EQ(dw_config_set(cfg.p, "clusters", (dir / "c.json").c_str()), DW_OK);
  ASSERT_EQ(dw_config_set(cfg.p, "grid", "2:1"), DW_OK);
  dw_workbench* wb = nullptr;
  uint16_t port = 0;
  ASSERT_EQ(dw_workbench_start(cfg.p, 0, &wb, &port), DW_OK) << dw_last_error();
  EXPECT_GT(port, 0);
  dw_workbench_stop(wb);
  std::filesystem::remove_all(dir);
}
