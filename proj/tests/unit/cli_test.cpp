// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

// Drives the installed command-line tool as a subprocess.

#include <gtest/gtest.h>

#include <json.hpp>

#include "dockwright/builder.hpp"
#include "test_support.hpp"

using dockwright::builder::ProcessResult;
using dockwright::builder::run_process;
using testsupport::TempDir;

namespace {

ProcessResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), DW_CLI_PATH);
  return run_process(args, 60);
}

int code(const ProcessResult& r) { return r.exit_code.value_or(-1); }

std::string fixture(const std::string& name) { return (testsupport::fixture_dir() / name).string(); }

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(code(cli({})), 2);
  EXPECT_EQ(code(cli({"frobnicate"})), 2);
  EXPECT_EQ(code(cli({"ingest"})), 2);  // --corpus is required
  auto help = cli({"--help"});
  EXPECT_EQ(code(help), 0);
  EXPECT_NE(help.out.find("ingest"), std::string::npos);
}

TEST(Cli, IngestReportsRejects) {
  TempDir dir;
  auto rejects = (dir / "rejects.json").string();
  auto out = (dir / "clean.jsonl").string();
  auto r = cli({"ingest", "--corpus", fixture("with_rejects.jsonl"), "--rejects", rejects, "--out", out});
  EXPECT_EQ(code(r), 0) << r.err;
  EXPECT_EQ(r.out.substr(0, 37), "records: 2\nrejected lines: 1\n  line 3");
  EXPECT_NE(r.out.find("breakage rate: "), std::string::npos);
  auto doc = nlohmann::json::parse(testsupport::read_file(rejects));
  ASSERT_EQ(doc.size(), 1u);
  EXPECT_EQ(doc[0]["line"], 3);
  EXPECT_EQ(code(cli({"ingest", "--corpus", out, "--strict"})), 0);

  auto strict = cli({"ingest", "--corpus", fixture("with_rejects.jsonl"), "--strict"});
  EXPECT_EQ(code(strict), 1);
  auto missing = cli({"ingest", "--corpus", (dir / "nope.jsonl").string()});
  EXPECT_EQ(code(missing), 2);
  EXPECT_NE(missing.err.find("dockwright: i/o error"), std::string::npos);
}

TEST(Cli, RepairWritesVariants) {
  TempDir dir;
  auto r = cli({"repair", "--corpus", fixture("demo.jsonl"), "--record", "r5", "--out-dir",
                dir.path().string()});
  ASSERT_EQ(code(r), 0) << r.err;
  EXPECT_EQ(r.out.substr(0, 33), "repaired by rule r5 (2 variants)\n");
  auto fix1 = testsupport::read_file(dir / "r5.Dockerfile.fix1");
  EXPECT_EQ(fix1.substr(0, 18), "FROM ubuntu:18.04\n");
  EXPECT_TRUE(std::filesystem::exists(dir / "r5.Dockerfile.fix2"));
  EXPECT_NE(r.out.find("-FROM ubuntu:latest\n+FROM ubuntu:18.04\n"), std::string::npos);

  EXPECT_EQ(code(cli({"repair", "--corpus", fixture("demo.jsonl"), "--record", "nope"})), 1);
  EXPECT_EQ(code(cli({"repair", "--corpus", fixture("demo.jsonl"), "--record", "ok-1"})), 1);
  EXPECT_EQ(code(cli({"repair", "--corpus", fixture("demo.jsonl")})), 2);
}

TEST(Cli, RepairFromFiles) {
  TempDir dir;
  testsupport::write_file(dir / "Dockerfile", "FROM ruby:2.6.3\nRUN bundle install\n");
  testsupport::write_file(dir / "build.log",
                          "Your Ruby version is 2.6.3, but your Gemfile specified 2.6.5\n");
  auto r = cli({"repair", "--dockerfile", (dir / "Dockerfile").string(), "--log",
                (dir / "build.log").string()});
  ASSERT_EQ(code(r), 0) << r.err;
  EXPECT_EQ(testsupport::read_file(dir / "Dockerfile.fix1"), "FROM ruby:2.6.5\nRUN bundle install\n");
}

TEST(Cli, ClusterThenReport) {
  TempDir dir;
  std::filesystem::copy_file(fixture("two_blob.jsonl"), dir / "c.jsonl");
  auto corpus = (dir / "c.jsonl").string();
  auto r = cli({"cluster", "--corpus", corpus, "--grid", "3:3,5:2"});
  ASSERT_EQ(code(r), 0) << r.err;
  EXPECT_NE(r.out.find("failing records: 20, clusters: 2, noise: 0"), std::string::npos) << r.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "c.clusters.json"));
  EXPECT_EQ(code(cli({"cluster", "--corpus", corpus, "--grid", "3"})), 2);

  auto rep = cli({"report", "--corpus", corpus, "--proportions", "--format", "csv"});
  ASSERT_EQ(code(rep), 0) << rep.err;
  EXPECT_EQ(rep.out.substr(0, rep.out.find('\n')),
            "cluster_id,size,repaired_frac,suggested_frac,unknown_frac");
  EXPECT_EQ(code(cli({"report", "--corpus", corpus})), 2);
  auto brk = cli({"report", "--corpus", corpus, "--breakage"});
  EXPECT_EQ(code(brk), 0);
  EXPECT_EQ(brk.out, "builds 20: 0 success, 20 failure, 0 timeout, 0 undetermined\n"
                     "breakage rate 100.00%\n");
}

TEST(Cli, SearchAgainstStub) {
  testsupport::StubServer stub;
  testsupport::install_search_stub(stub.server());
  stub.start();
  auto r = cli({"search", "--corpus", fixture("demo.jsonl"), "--record", "mystery-1",
                "--search-url", stub.url()});
  ASSERT_EQ(code(r), 0) << r.err;
  auto lines = std::count(r.out.begin(), r.out.end(), '\n');
  EXPECT_EQ(lines, 6);  // query line plus five leads
  EXPECT_EQ(r.out.find("example.com"), std::string::npos);
  stub.stop();
  auto down = cli({"search", "--corpus", fixture("demo.jsonl"), "--record", "mystery-1",
                   "--search-url", stub.url()});
  EXPECT_EQ(code(down), 2);
}
