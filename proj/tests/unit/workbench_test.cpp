// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include <gtest/gtest.h>

#include <json.hpp>

#include "dockwright/errors.hpp"
#include "dockwright/workbench.hpp"
#include "test_support.hpp"

using namespace dockwright;
using nlohmann::json;
using testsupport::TempDir;

namespace {

const char* kNewRepair = R"({"repair": {
  "id": "r-node14", "static_re": "^FROM node:(14)$", "dynamic_re": "npm err!",
  "solutions": [[{"op": "replace", "target": "$0", "text": "16"}]]}})";

class WorkbenchHttp : public ::testing::Test {
 protected:
  void SetUp() override {
    std::filesystem::copy_file(testsupport::fixture_dir() / "demo.jsonl", dir / "corpus.jsonl");
    search.server().Get("/search", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"([{"url": "https://stackoverflow.com/questions/1", "title": "so"},
                          {"url": "https://example.com/x", "title": "other"}])",
                      "application/json");
    });
    search.start();
    cfg = default_config();
    cfg.corpus = dir / "corpus.jsonl";
    cfg.rules = dir / "rules.json";
    cfg.clusters = dir / "clusters.json";
    cfg.grid = {{2, 1}, {3, 2}};
    cfg.search.url = search.url();
    boot();
  }
  void boot() {
    wb.reset();
    wb = workbench::Workbench::open(cfg);
    port = wb->start("127.0.0.1", 0);
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }
  json get(const std::string& path, int expect = 200) {
    auto res = client->Get(path);
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
    return json::parse(res->body);
  }
  json post(const std::string& path, const std::string& body, int expect) {
    auto res = client->Post(path, body, "application/json");
    EXPECT_TRUE(res);
    if (!res) return {};
    EXPECT_EQ(res->status, expect) << path << " " << res->body;
    return json::parse(res->body);
  }

  TempDir dir;
  testsupport::StubServer search;
  Config cfg;
  std::unique_ptr<workbench::Workbench> wb;
  std::uint16_t port = 0;
  std::unique_ptr<httplib::Client> client;
};

}  // namespace

TEST_F(WorkbenchHttp, ClustersAndRecords) {
  EXPECT_TRUE(std::filesystem::exists(cfg.clusters));
  auto c = get("/clusters");
  EXPECT_EQ(c["stale"], false);
  EXPECT_EQ(c["clustered_records"], 8);
  std::size_t total = c["noise_count"].get<std::size_t>();
  for (const auto& cl : c["clusters"]) total += cl["size"].get<std::size_t>();
  EXPECT_EQ(total, 8u);
  if (!c["clusters"].empty()) {
    auto one = get("/clusters/0");
    EXPECT_EQ(one["members"].size(), one["size"].get<std::size_t>());
    EXPECT_TRUE(one["members"][0].contains("log_tail"));
  }
  get("/clusters/99", 404);
  get("/clusters/abc", 404);

  auto r = get("/records/r5");
  EXPECT_EQ(r["id"], "r5");
  EXPECT_EQ(r["outcome"], "failure");
  EXPECT_TRUE(r.contains("cluster_id"));
  EXPECT_NE(r["log_tail"].get<std::string>().find("Unable to locate package"), std::string::npos);
  EXPECT_EQ(get("/records/ok-1")["cluster_id"], -1);
  auto missing = get("/records/nope", 404);
  EXPECT_EQ(missing["kind"], "not_found");
  get("/no/such/endpoint", 404);
}

TEST_F(WorkbenchHttp, RulesDryRunAndSave) {
  auto rules = get("/rules");
  auto v0 = rules["version"].get<std::uint64_t>();
  EXPECT_GE(rules["repairs"].size(), 6u);

  auto dry = post("/rules/dry-run",
                  R"({"rule": {"id": "x", "static_re": "^FROM", "dynamic_re": "npm err!",
                      "message": "m"}})",
                  200);
  EXPECT_EQ(dry["matched_ids"], json::array({"npm-1"}));
  EXPECT_EQ(dry["considered"], 8);
  EXPECT_EQ(dry["rules_version"], v0);
  EXPECT_EQ(get("/rules")["version"], v0);  // dry runs never write

  auto preview = post("/rules/dry-run",
                      R"({"kind": "repair", "record_id": "npm-1", "rule": )" +
                          json::parse(kNewRepair)["repair"].dump() + "}",
                      200);
  EXPECT_EQ(preview["preview"]["matched"], true);
  EXPECT_NE(preview["preview"]["variants"][0]["diff"].get<std::string>().find("+FROM node:16"),
            std::string::npos);

  post("/rules/dry-run", "{", 400);
  post("/rules/dry-run", R"({"rule": {"id": "x", "static_re": "(", "dynamic_re": "", "message": "m"}})", 400);
  post("/rules/dry-run", R"({"cluster_id": 42, "rule": {"id": "x", "static_re": "^FROM", "message": "m"}})", 404);

  auto saved = post("/rules", kNewRepair, 201);
  EXPECT_EQ(saved["id"], "r-node14");
  EXPECT_EQ(saved["version"], v0 + 1);
  auto after = get("/rules");  // read-your-writes
  EXPECT_EQ(after["version"], v0 + 1);
  bool found = false;
  for (const auto& r : after["repairs"]) found = found || r["id"] == "r-node14";
  EXPECT_TRUE(found);
  post("/rules", kNewRepair, 409);
  auto body = json::parse(kNewRepair);
  body["replace"] = true;
  EXPECT_EQ(post("/rules", body.dump(), 201)["version"], v0 + 2);
  post("/rules", R"({"repair": {}, "suggestion": {}})", 400);

  auto fixed = post("/repair/npm-1", R"({"search": false})", 200);
  EXPECT_EQ(fixed["kind"], "repaired");
  EXPECT_EQ(fixed["rule_id"], "r-node14");

  boot();  // restart: the saved db is picked up from disk
  EXPECT_EQ(get("/rules")["version"], v0 + 2);
}

TEST_F(WorkbenchHttp, RepairAndSearch) {
  auto r5 = post("/repair/r5", "", 200);
  EXPECT_EQ(r5["kind"], "repaired");
  EXPECT_EQ(r5["rule_id"], "r5");
  EXPECT_EQ(r5["variants"].size(), 2u);
  EXPECT_EQ(r5["variants"][0]["text"].get<std::string>().substr(0, 18), "FROM ubuntu:18.04\n");

  auto npm = post("/repair/npm-1", "{}", 200);
  EXPECT_EQ(npm["kind"], "suggested");
  EXPECT_EQ(npm["suggestion"]["id"], "s-npm-build");

  auto mystery = post("/repair/mystery-1", "{}", 200);
  EXPECT_EQ(mystery["kind"], "search_fallback");
  EXPECT_EQ(mystery["search"]["results"].size(), 1u);

  post("/repair/nope", "{}", 404);
  post("/repair/r5", "{", 400);

  auto s = get("/search?record=mystery-1");
  EXPECT_FALSE(s["keywords"].empty());
  EXPECT_EQ(s["results"][0]["url"], "https://stackoverflow.com/questions/1");
  get("/search", 400);
  get("/search?record=nope", 404);
}

TEST_F(WorkbenchHttp, SearchUnavailable) {
  cfg.search.url.clear();
  boot();
  auto s = get("/search?record=mystery-1", 503);
  EXPECT_EQ(s["kind"], "config");
  search.stop();
  cfg.search.url = search.url();
  boot();
  EXPECT_EQ(get("/search?record=mystery-1", 502)["kind"], "transport");
}

TEST_F(WorkbenchHttp, Recompute) {
  std::filesystem::remove(cfg.clusters);
  auto r = post("/clusters/recompute", "", 202);
  EXPECT_TRUE(r["status"] == "started" || r["status"] == "running");
  wb->wait_for_recompute();
  EXPECT_FALSE(wb->stale());
  EXPECT_TRUE(std::filesystem::exists(cfg.clusters));
  EXPECT_EQ(get("/clusters")["stale"], false);
}

TEST(Workbench, OpenErrors) {
  TempDir dir;
  auto cfg = default_config();
  EXPECT_THROW(workbench::Workbench::open(cfg), ConfigError);
  cfg.corpus = dir / "missing.jsonl";
  EXPECT_THROW(workbench::Workbench::open(cfg), IoError);
}

TEST(Workbench, PortInUseIsTransportError) {
  TempDir dir;
  testsupport::StubServer holder;
  holder.start();
  workbench::Workbench wb(default_config(), {}, rules::builtin_rules(), {});
  EXPECT_THROW(wb.start("127.0.0.1", static_cast<std::uint16_t>(holder.port())), TransportError);
}
