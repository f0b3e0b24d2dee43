// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "dockwright/dockerfile.hpp"
#include "dockwright/errors.hpp"
#include "test_support.hpp"

using namespace dockwright;
using namespace dockwright::dockerfile;

namespace {

// Every byte is either inside exactly one instruction span or in a gap that
// holds only whitespace (and line terminators).
void check_coverage(const DockerfileAst& ast) {
  std::size_t cursor = 0;
  for (const auto& ins : ast.instructions) {
    ASSERT_LE(cursor, ins.span.start);
    ASSERT_LE(ins.span.start, ins.span.end);
    ASSERT_LE(ins.span.end, ast.source.size());
    for (auto i = cursor; i < ins.span.start; ++i)
      ASSERT_TRUE(std::string_view(" \t\r\n\v\f").find(ast.source[i]) != std::string_view::npos)
          << "non-space byte " << int(ast.source[i]) << " outside any span at " << i;
    cursor = ins.span.end;
  }
}

}  // namespace

TEST(Parse, RubyExample) {
  auto ast = parse("FROM ruby:2.6.3\nRUN bundle install\n");
  ASSERT_EQ(ast.instructions.size(), 2u);
  EXPECT_EQ(ast.instructions[0].kind, "FROM");
  EXPECT_EQ(ast.instructions[0].args_raw, "ruby:2.6.3");
  EXPECT_EQ(ast.instructions[1].kind, "RUN");
  EXPECT_EQ(ast.instructions[1].args_raw, "bundle install");
  EXPECT_EQ(ast.text(ast.instructions[0]), "FROM ruby:2.6.3");
}

TEST(Parse, Empty) {
  auto ast = parse("");
  EXPECT_TRUE(ast.instructions.empty());
  EXPECT_EQ(serialize(ast), "");
}

TEST(Parse, ContinuationSpansBothLines) {
  std::string text = "RUN apt-get update \\\n && apt-get install -y curl\n";
  auto ast = parse(text);
  ASSERT_EQ(ast.instructions.size(), 1u);
  const auto& ins = ast.instructions[0];
  EXPECT_EQ(ins.kind, "RUN");
  EXPECT_EQ(ins.span.start, 0u);
  EXPECT_EQ(ins.span.end, text.size() - 1);
  EXPECT_EQ(ins.args_raw, "apt-get update  && apt-get install -y curl");
  EXPECT_EQ(normalize_args(ins.args_raw), "apt-get update && apt-get install -y curl");
}

TEST(Parse, CommentsUnknownAndCase) {
  auto ast = parse("# hello\nfrom alpine\nFROMX x\n  # indented\nrun echo hi\n");
  ASSERT_EQ(ast.instructions.size(), 5u);
  EXPECT_EQ(ast.instructions[0].kind, "COMMENT");
  EXPECT_EQ(ast.instructions[0].args_raw, " hello");
  EXPECT_EQ(ast.instructions[1].kind, "FROM");
  EXPECT_EQ(ast.instructions[2].kind, "UNKNOWN");
  EXPECT_EQ(ast.instructions[2].args_raw, "FROMX x");
  EXPECT_EQ(ast.instructions[3].kind, "COMMENT");
  EXPECT_EQ(ast.instructions[4].kind, "RUN");
}

TEST(Parse, CommentAndBlankInsideContinuation) {
  std::string text = "RUN a \\\n# note\n\n    b\nCMD c\n";
  auto ast = parse(text);
  ASSERT_EQ(ast.instructions.size(), 2u);
  EXPECT_EQ(ast.instructions[0].args_raw, "a     b");
  EXPECT_EQ(ast.text(ast.instructions[0]), "RUN a \\\n# note\n\n    b");
  EXPECT_EQ(ast.instructions[1].kind, "CMD");
}

TEST(Parse, DanglingContinuationAtEof) {
  auto ast = parse("RUN echo \\\n\n");
  ASSERT_EQ(ast.instructions.size(), 1u);
  EXPECT_EQ(ast.text(ast.instructions[0]), "RUN echo \\");
}

TEST(Parse, CrlfKeepsBytes) {
  std::string text = "FROM a\r\nRUN b \\\r\n  c\r\n";
  auto ast = parse(text);
  ASSERT_EQ(ast.instructions.size(), 2u);
  EXPECT_EQ(ast.instructions[1].args_raw, "b   c");
  EXPECT_EQ(serialize(ast), text);
}

TEST(Parse, InstructionAt) {
  auto ast = parse("FROM a\n\nRUN b\n");
  EXPECT_EQ(ast.instruction_at(0), 0u);
  EXPECT_EQ(ast.instruction_at(5), 0u);
  EXPECT_EQ(ast.instruction_at(6), std::string::npos);  // the newline
  EXPECT_EQ(ast.instruction_at(8), 1u);
}

TEST(RoundTrip, FixtureCorpus) {
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(testsupport::fixture_dir() / "dockerfiles")) {
    auto text = testsupport::read_file(entry.path());
    auto ast = parse(text);
    ASSERT_EQ(serialize(ast), text) << entry.path();
    check_coverage(ast);
    ++count;
  }
  EXPECT_GE(count, 200u);
}

TEST(RoundTrip, RandomByteStrings) {
  std::mt19937_64 rng(99);
  const std::string alphabet = "FROMRUNCOPYrun \t\r\n\\#:=\"'$`{}\x01\x7f\xc3\xa9\xff";
  for (int i = 0; i < 2000; ++i) {
    std::string s(rng() % 200, '\0');
    for (auto& c : s)
      c = (rng() % 3 == 0) ? static_cast<char>(rng() % 256) : alphabet[rng() % alphabet.size()];
    auto ast = parse(s);
    ASSERT_EQ(serialize(ast), s);
    check_coverage(ast);
    for (std::size_t k = 1; k < ast.instructions.size(); ++k)
      ASSERT_LE(ast.instructions[k - 1].span.end, ast.instructions[k].span.start);
  }
}

TEST(Splice, ReplaceTag) {
  std::string text = "FROM ubuntu:latest\n";
  auto at = text.find(":latest");
  std::vector<Edit> edits{{{at, at + 7}, ":18.04"}};
  EXPECT_EQ(splice(parse(text), edits), "FROM ubuntu:18.04\n");
}

TEST(Splice, InsertAfterFrom) {
  std::string text = "FROM ubuntu\nRUN x\n";
  auto ast = parse(text);
  auto end = ast.instructions[0].span.end;
  std::vector<Edit> edits{{{end, end}, "\nARG DEBIAN_FRONTEND=noninteractive"}};
  EXPECT_EQ(splice(ast, edits), "FROM ubuntu\nARG DEBIAN_FRONTEND=noninteractive\nRUN x\n");
}

TEST(Splice, EmptyEditListIsIdentity) {
  std::string text = "FROM a\nRUN b\n";
  EXPECT_EQ(splice(text, {}), text);
}

TEST(Splice, RemovalAndCombinedEdits) {
  std::string text = "FROM a\nRUN b\nCMD c\n";
  std::vector<Edit> edits{{{7, 13}, ""}, {{0, 6}, "FROM z"}, {{19, 19}, "# end\n"}};
  EXPECT_EQ(splice(text, edits), "FROM z\nCMD c\n# end\n");
}

TEST(Splice, OverlapAndBoundsAreValidationErrors) {
  std::string text = "FROM a\n";
  std::vector<Edit> overlap{{{0, 4}, "x"}, {{2, 6}, "y"}};
  EXPECT_THROW(splice(text, overlap), ValidationError);
  std::vector<Edit> oob{{{5, 40}, "x"}};
  EXPECT_THROW(splice(text, oob), ValidationError);
  std::vector<Edit> twice{{{3, 3}, "x"}, {{3, 3}, "y"}};
  EXPECT_THROW(splice(text, twice), ValidationError);
  try {
    splice(text, overlap);
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("edit#0"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("edit#1"), std::string::npos);
  }
}

TEST(Splice, DisjointEditsAreOrderIndependent) {
  std::mt19937 rng(5);
  std::string text = "FROM ubuntu:latest\nRUN apt-get update\nRUN apt-get install -y curl\nCMD x\n";
  for (int round = 0; round < 300; ++round) {
    // random disjoint spans
    std::vector<std::size_t> cuts;
    for (int i = 0; i < 6; ++i) cuts.push_back(rng() % (text.size() + 1));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<Edit> edits;
    for (std::size_t i = 0; i + 1 < cuts.size(); i += 2)
      edits.push_back({{cuts[i], cuts[i + 1]}, std::string(rng() % 4, 'a' + char(i))});
    auto want = splice(text, edits);
    std::shuffle(edits.begin(), edits.end(), rng);
    ASSERT_EQ(splice(text, edits), want);
  }
}
