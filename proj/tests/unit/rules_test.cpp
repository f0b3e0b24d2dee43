// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include <gtest/gtest.h>

#include "dockwright/errors.hpp"
#include "dockwright/logpipe.hpp"
#include "dockwright/rules.hpp"
#include "test_support.hpp"

using namespace dockwright;
using namespace dockwright::rules;
using testsupport::TempDir;

namespace {

const char* kUbuntuFile =
    "FROM ubuntu:latest\nRUN apt-get update\nRUN apt-get -y install python-pip\nCOPY . /app\n";
const char* kUbuntuLog =
    "Step 3/4 : RUN apt-get -y install python-pip\nReading package lists...\n"
    "E: Unable to locate package python-pip\n";
const char* kRubyFile =
    "FROM ruby:2.6.3\nRUN apt-get update -qq && apt-get install -y build-essential nodejs\n"
    "RUN gem install bundler:2.0.1\nRUN bundle install\nADD . /app\n";
const char* kRubyLog = "Your Ruby version is 2.6.3, but your Gemfile specified 2.6.5\n";

BuildRecord failing(std::string id, std::string dockerfile, std::string stderr_log) {
  BuildRecord r;
  r.record_id = std::move(id);
  r.dockerfile_text = std::move(dockerfile);
  r.stderr_log = std::move(stderr_log);
  r.outcome = BuildOutcome::Failure;
  return r;
}

const RuleDb& shipped() {
  static const RuleDb db = builtin_rules();
  return db;
}

}  // namespace

TEST(Pattern, UbuntuBinding) {
  const auto* r5 = shipped().find_repair("r5");
  ASSERT_NE(r5, nullptr);
  auto b = match_rule(r5->pattern, "FROM ubuntu:latest\nRUN apt-get -y install python-pip\n",
                      logpipe::normalize("E: Unable to locate package python-pip"));
  ASSERT_TRUE(b);
  EXPECT_EQ(b->at(0).text, ":latest");
  EXPECT_EQ(b->at(0).document, Document::Static);
  EXPECT_EQ(b->at(0).span, (SourceSpan{11, 18}));
  EXPECT_EQ(b->at(1).text, "python-pip");
  EXPECT_EQ(b->at(1).document, Document::Dynamic);
}

TEST(Pattern, UbuntuAlternation) {
  const auto& p = shipped().find_repair("r5")->pattern;
  auto log = logpipe::normalize("E: Unable to locate package curl");
  EXPECT_FALSE(match_rule(p, "FROM ubuntu:18.04\nRUN x\n", log));
  auto bare = match_rule(p, "FROM ubuntu\nRUN x\n", log);
  ASSERT_TRUE(bare);
  EXPECT_EQ(bare->at(0).text, "");
  EXPECT_TRUE(match_rule(p, "FROM ubuntu:20.04 AS base\n", log));
  EXPECT_FALSE(match_rule(p, "FROM ubuntu:20.04.1\n", log));
  EXPECT_FALSE(match_rule(p, "FROM ubuntu:latest\n", "nothing to see"));
}

TEST(Pattern, RubyBinding) {
  const auto& p = shipped().find_repair("r6")->pattern;
  auto b = match_rule(p, kRubyFile, logpipe::normalize(kRubyLog));
  ASSERT_TRUE(b);
  EXPECT_EQ(b->at(0).text, "2.6.3");
  EXPECT_EQ(b->at(1).text, "2.6.5");
  // the log must talk about the version the Dockerfile actually uses
  EXPECT_FALSE(match_rule(p, "FROM ruby:2.7.1\n", logpipe::normalize(kRubyLog)));
}

TEST(Pattern, ConjunctionProperty) {
  auto p = Pattern::compile("^FROM (\\S+)", "error: (\\w+)");
  for (auto [df, log] : std::vector<std::pair<std::string, std::string>>{
           {"FROM a\n", "error: x"}, {"FROM a\n", "ok"}, {"RUN a\n", "error: x"}, {"", ""}}) {
    bool s = Pattern::compile("^FROM (\\S+)", std::nullopt).match(df, "").has_value();
    bool d = Pattern::compile(std::nullopt, "error: (\\w+)").match("", log).has_value();
    EXPECT_EQ(p.match(df, log).has_value(), s && d) << df << "|" << log;
  }
  EXPECT_EQ(p.static_groups(), 1u);
  EXPECT_EQ(p.dynamic_groups(), 1u);
  auto b = p.match("FROM img\n", "error: boom");
  EXPECT_EQ(b->at(1).text, "boom");
}

TEST(Pattern, CompileErrors) {
  EXPECT_THROW(Pattern::compile(std::nullopt, std::nullopt), ValidationError);
  EXPECT_THROW(Pattern::compile("([a-", std::nullopt), ValidationError);
  EXPECT_THROW(Pattern::compile("FROM (x)", "needs ${3}"), ValidationError);
}

TEST(Interpolate, DollarForms) {
  Binding b{{0, {"zero", {}, Document::Static}}, {1, {"one", {}, Document::Dynamic}}};
  EXPECT_EQ(interpolate("$0-$1 costs $$5 and $x", b), "zero-one costs $5 and $x");
  EXPECT_THROW(interpolate("$2", b), ApplicationError);
}

TEST(Apply, ReplaceAndIdentity) {
  const auto* r5 = shipped().find_repair("r5");
  auto b = match_rule(r5->pattern, kUbuntuFile, logpipe::normalize(kUbuntuLog));
  ASSERT_TRUE(b);
  auto out = apply_solution(kUbuntuFile, r5->solutions[0], *b);
  EXPECT_EQ(out.substr(0, out.find('\n')), "FROM ubuntu:18.04");
  EXPECT_EQ(apply_solution(kUbuntuFile, {}, *b), kUbuntuFile);
}

TEST(Apply, RubyRetag) {
  const auto* r6 = shipped().find_repair("r6");
  auto b = match_rule(r6->pattern, kRubyFile, logpipe::normalize(kRubyLog));
  auto out = apply_solution(kRubyFile, r6->solutions[0], *b);
  EXPECT_EQ(out.substr(0, out.find('\n')), "FROM ruby:2.6.5");
  EXPECT_EQ(out.substr(out.find('\n')), std::string(kRubyFile).substr(15));
}

TEST(Apply, Errors) {
  auto p = Pattern::compile("^FROM (\\S+)", "missing (\\S+)");
  auto b = p.match("FROM a\nRUN b\n", "missing tool");
  ASSERT_TRUE(b);
  // $5 is not bound
  EXPECT_THROW(apply_solution("FROM a\nRUN b\n", {{OpKind::Replace, "$5", "x"}}, *b),
               ApplicationError);
  // replace needs a static target
  EXPECT_THROW(apply_solution("FROM a\nRUN b\n", {{OpKind::Replace, "$1", "x"}}, *b),
               ApplicationError);
  // two edits over the same bytes
  EXPECT_THROW(apply_solution("FROM a\nRUN b\n",
                              {{OpKind::Replace, "$0", "x"}, {OpKind::Remove, "$0", ""}}, *b),
               ApplicationError);
  // selector that finds nothing
  EXPECT_THROW(apply_solution("FROM a\nRUN b\n", {{OpKind::Remove, "COPY", ""}}, *b),
               ApplicationError);
}

TEST(Apply, SelectorsAndInsertAfter) {
  auto p = Pattern::compile("^FROM (\\S+)", "no (\\S+) here");
  std::string text = "FROM a\nRUN apt-get install x y\nRUN apt-get \\\n  install z\n";
  auto b = p.match(text, "no y here");
  ASSERT_TRUE(b);
  EXPECT_EQ(apply_solution(text, {{OpKind::Remove, "RUN:/ ${1}/", ""}}, *b),
            "FROM a\nRUN apt-get install x\nRUN apt-get \\\n  install z\n");
  EXPECT_EQ(apply_solution(text, {{OpKind::InsertAfter, "RUN:/install z/", "\nCMD $1"}}, *b),
            text.substr(0, text.size() - 1) + "\nCMD y\n");
  EXPECT_EQ(apply_solution(text, {{OpKind::Replace, "RUN", "RUN true"}}, *b),
            "FROM a\nRUN true\nRUN apt-get \\\n  install z\n");
}

TEST(Apply, OutputDiffersOnlyInsideEdits) {
  const auto* r7 = shipped().find_repair("r7");
  const auto& fx = r7->fixtures.at(0);
  auto b = r7->pattern.match(fx.dockerfile, logpipe::normalize(fx.log));
  ASSERT_TRUE(b);
  auto out = apply_solution(fx.dockerfile, r7->solutions[0], *b);
  auto from_end = fx.dockerfile.find('\n');
  EXPECT_EQ(out.substr(0, from_end), fx.dockerfile.substr(0, from_end));
  EXPECT_EQ(out.substr(out.size() - (fx.dockerfile.size() - from_end)), fx.dockerfile.substr(from_end));
}

TEST(Db, ShippedRulesLoad) {
  const auto& db = shipped();
  EXPECT_GE(db.repairs.size(), 5u);
  EXPECT_GE(db.suggestions.size(), 10u);
  for (const char* id : {"r1", "r5", "r6", "r7", "r8"}) EXPECT_NE(db.find_repair(id), nullptr) << id;
  EXPECT_NE(db.find_suggestion("s-npm-build"), nullptr);
}

TEST(Db, RoundTripAndVersionBump) {
  TempDir dir;
  auto db = shipped();
  db.version = 4;
  auto v = save_rules(db, dir / "rules.json");
  EXPECT_EQ(v, 5u);
  auto back = load_rules(dir / "rules.json");
  EXPECT_EQ(back.version, 5u);
  EXPECT_EQ(rules_to_json(RuleDb{back.repairs, back.suggestions, 4}), rules_to_json(db));
  EXPECT_EQ(save_rules(back, dir / "rules.json"), 6u);
}

TEST(Db, EmptyFileAndEmptyObject) {
  TempDir dir;
  testsupport::write_file(dir / "empty.json", "");
  auto db = load_rules(dir / "empty.json");
  EXPECT_TRUE(db.repairs.empty());
  EXPECT_TRUE(db.suggestions.empty());
  EXPECT_TRUE(rules_from_json("{\"repairs\": [], \"suggestions\": []}").repairs.empty());
}

TEST(Db, InvalidRegexNamesRule) {
  try {
    rules_from_json(R"J({"repairs": [{"id": "r9", "static_re": "FROM ([a-", "dynamic_re": null,
                         "solutions": [[{"op": "remove", "target": "$0"}]]}]})J");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("r9"), std::string::npos) << e.what();
  }
}

TEST(Db, Defects) {
  const char* dup = R"J({"suggestions": [
      {"id": "s", "static_re": null, "dynamic_re": "x", "message": "m"},
      {"id": "s", "static_re": null, "dynamic_re": "y", "message": "m"}]})J";
  EXPECT_THROW(rules_from_json(dup), ValidationError);
  const char* bad_op = R"J({"repairs": [{"id": "q", "static_re": "(a)", "dynamic_re": null,
      "solutions": [[{"op": "explode", "target": "$0"}]]}]})J";
  EXPECT_THROW(rules_from_json(bad_op), ValidationError);
  const char* dangling = R"J({"repairs": [{"id": "q", "static_re": "(a)", "dynamic_re": null,
      "solutions": [[{"op": "replace", "target": "$0", "text": "$4"}]]}]})J";
  EXPECT_THROW(rules_from_json(dangling), ValidationError);
  const char* no_solutions = R"J({"repairs": [{"id": "q", "static_re": "(a)", "dynamic_re": null,
      "solutions": []}]})J";
  EXPECT_THROW(rules_from_json(no_solutions), ValidationError);
  const char* bad_fixture = R"J({"repairs": [{"id": "q", "static_re": "^FROM (a)", "dynamic_re": null,
      "solutions": [[{"op": "replace", "target": "$0", "text": "b"}]],
      "fixtures": [{"dockerfile": "FROM z\n", "log": ""}]}]})J";
  EXPECT_THROW(rules_from_json(bad_fixture), ValidationError);
  EXPECT_THROW(rules_from_json("[1,2]"), ValidationError);
}

TEST(Db, WireFieldNames) {
  auto json = rules_to_json(shipped());
  for (const char* key : {"\"repairs\"", "\"suggestions\"", "\"id\"", "\"static_re\"",
                          "\"dynamic_re\"", "\"solutions\"", "\"op\"", "\"target\"", "\"text\"",
                          "\"src\"", "\"notes\"", "\"message\""})
    EXPECT_NE(json.find(key), std::string::npos) << key;
}

TEST(ShippedFixtures, EverySolutionRemovesItsTrigger) {
  for (const auto& rule : shipped().repairs) {
    ASSERT_FALSE(rule.fixtures.empty()) << rule.id;
    auto static_only = Pattern::compile(rule.pattern.static_re(), std::nullopt);
    for (const auto& fx : rule.fixtures) {
      auto log = logpipe::normalize(fx.log);
      auto b = rule.pattern.match(fx.dockerfile, log);
      ASSERT_TRUE(b) << rule.id;
      for (std::size_t s = 0; s < rule.solutions.size(); ++s) {
        auto out = apply_solution(fx.dockerfile, rule.solutions[s], *b);
        EXPECT_NE(out, fx.dockerfile) << rule.id << " solution " << s;
        EXPECT_FALSE(rule.pattern.match(out, log)) << rule.id << " solution " << s;
        // Retagging to the version the log asks for keeps a ruby FROM line,
        // so r1/r6 only stop matching through the log-side version check.
        if (rule.id != "r1" && rule.id != "r6")
          EXPECT_FALSE(static_only.match(out, "")) << rule.id << " solution " << s;
      }
    }
  }
}

TEST(Repair, UbuntuTwoVariants) {
  auto out = repair(failing("u", kUbuntuFile, kUbuntuLog), shipped());
  ASSERT_EQ(out.kind, OutcomeKind::Repaired);
  EXPECT_EQ(out.rule_id, "r5");
  ASSERT_EQ(out.variants.size(), 2u);
  EXPECT_EQ(out.variants[0].solution_index, 0u);
  EXPECT_EQ(out.variants[0].text,
            "FROM ubuntu:18.04\nRUN apt-get update\nRUN apt-get -y install python-pip\nCOPY . /app\n");
  EXPECT_EQ(out.variants[1].text,
            "FROM ubuntu:latest\nARG DEBIAN_FRONTEND=noninteractive\n"
            "RUN apt-get update && apt-get -y install python2 curl software-properties-common \\\n"
            "  && add-apt-repository universe \\\n"
            "  && curl https://bootstrap.pypa.io/pip/2.7/get-pip.py --output get-pip.py \\\n"
            "  && python2 get-pip.py\nRUN apt-get update\nRUN apt-get -y install\nCOPY . /app\n");
}

TEST(Repair, SuggestionAndPrecedence) {
  const char* npm_file = "FROM node:14\nRUN npm install\nRUN npm run build\n";
  auto s = repair(failing("n", npm_file, "npm ERR! code ELIFECYCLE\n"), shipped());
  ASSERT_EQ(s.kind, OutcomeKind::Suggested);
  EXPECT_EQ(s.suggestion_id, "s-npm-build");
  EXPECT_EQ(s.message.rfind("NPM build error", 0), 0u);
  ASSERT_TRUE(s.suggestion_span);
  EXPECT_EQ(std::string(npm_file).substr(s.suggestion_span->start, s.suggestion_span->size()),
            "RUN npm run build");

  // Matches r5 and s-npm-build at once: the repair wins.
  std::string both = std::string(kUbuntuFile) + "RUN npm run build\n";
  auto r = repair(failing("b", both, std::string(kUbuntuLog) + "npm ERR! x\n"), shipped());
  EXPECT_EQ(r.kind, OutcomeKind::Repaired);
  EXPECT_EQ(r.rule_id, "r5");
}

TEST(Repair, NonFailureRejected) {
  auto r = failing("x", kUbuntuFile, kUbuntuLog);
  r.outcome = BuildOutcome::Success;
  EXPECT_THROW(repair(r, shipped()), ValidationError);
}

TEST(Repair, SearchFallback) {
  testsupport::StubServer stub;
  testsupport::install_search_stub(stub.server());
  stub.start();
  search::SearchClient client(stub.url());
  auto rec = failing("m", "FROM python:3.8\nRUN pip install numpy\n",
                     "Collecting numpy\nModuleNotFoundError: No module named 'numpy'\n");
  auto out = repair(rec, shipped(), &client);
  ASSERT_EQ(out.kind, OutcomeKind::SearchFallback);
  EXPECT_FALSE(out.keywords.empty());
  EXPECT_EQ(out.query_string.rfind("dockerfile ", 0), 0u);
  EXPECT_LE(out.results.size(), 5u);
  EXPECT_EQ(out.results.size(), 5u);
  for (const auto& res : out.results) EXPECT_TRUE(search::allowlisted(res.url, search::default_allowlist()));
  EXPECT_TRUE(out.search_error.empty());

  auto offline = repair(rec, shipped(), nullptr);
  EXPECT_EQ(offline.kind, OutcomeKind::SearchFallback);
  EXPECT_TRUE(offline.results.empty());
}

TEST(DryRun, FractionAndNarrowing) {
  std::vector<BuildRecord> cluster;
  const char* pkgs[] = {"python-pip", "python-pip", "python-pip", "python-pip", "curl",
                        "python-pip", "python-pip", "python-pip", "wget", "python-pip"};
  for (int i = 0; i < 10; ++i)
    cluster.push_back(failing("c" + std::to_string(i), "FROM ubuntu:latest\nRUN apt-get -y install x\n",
                              std::string("E: Unable to locate package ") + pkgs[i]));
  auto general = Pattern::compile(std::string("^FROM ubuntu(|:latest|:20\\.04)"),
                                  std::string("unable to locate package (.*)"));
  auto narrow = Pattern::compile(std::string("^FROM ubuntu(|:latest|:20\\.04)"),
                                 std::string("unable to locate package (python-pip)"));
  auto g = dry_run(general, cluster), n = dry_run(narrow, cluster);
  EXPECT_EQ(g.considered, 10u);
  EXPECT_DOUBLE_EQ(*g.fraction, 1.0);
  EXPECT_DOUBLE_EQ(*n.fraction, 0.8);
  EXPECT_EQ(n.matched_ids.size(), 8u);
  EXPECT_LT(*n.fraction, *g.fraction);

  auto empty = dry_run(general, {});
  EXPECT_EQ(empty.considered, 0u);
  EXPECT_FALSE(empty.fraction);

  // non-failing records are not considered
  cluster[0].outcome = BuildOutcome::Success;
  EXPECT_EQ(dry_run(general, cluster).considered, 9u);
}
