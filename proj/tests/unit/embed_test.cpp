// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dockwright/embed.hpp"
#include "dockwright/errors.hpp"
#include "test_support.hpp"

using namespace dockwright;
using namespace dockwright::embed;

namespace {

// Values frozen from scripts/embed_oracle.py, an independent Python
// implementation of the hashing scheme.
constexpr double kCosT1T2 = 0.77842887909078828;
constexpr double kCosT1T3 = 3.4694469519536142e-18;
constexpr double kCosT2T3 = 0.052378280087892456;
constexpr const char* kT1 = "unable to locate package python pip";
constexpr const char* kT2 = "unable to locate package curl";
constexpr const char* kT3 = "your ruby version is 2 6 3";

logpipe::TokenSequence seq(std::string_view joined) { return logpipe::tokenize(joined); }

}  // namespace

TEST(Fnv, PublishedConstantsAndOracle) {
  EXPECT_EQ(fnv1a64(""), 14695981039346656037ull);
  EXPECT_EQ(fnv1a64("a"), 12638187200555641996ull);
  EXPECT_EQ(fnv1a64("foobar"), 9625390261332436968ull);
  EXPECT_EQ(fnv1a64("w:pip"), 12274909375675505165ull);
}

TEST(Hashed, MatchesOracleComponents) {
  EmbedderConfig cfg;
  auto v = embed_hashed(kT1, cfg);
  ASSERT_EQ(v.dim(), 256u);
  EXPECT_NEAR(v.values[6], -0.09651943970829327, 1e-12);
  EXPECT_NEAR(v.values[9], 0.09651943970829327, 1e-12);
  EXPECT_NEAR(v.values[12], -0.09651943970829327, 1e-12);
  EXPECT_NEAR(v.values[13], -0.19303887941658654, 1e-12);
  std::size_t nonzero = 0;
  for (double x : v.values) nonzero += x != 0.0;
  EXPECT_EQ(nonzero, 74u);
}

TEST(Hashed, TripletOrdering) {
  EmbedderConfig cfg;
  auto e1 = embed::embed(seq(kT1), cfg), e2 = embed::embed(seq(kT2), cfg), e3 = embed::embed(seq(kT3), cfg);
  EXPECT_NEAR(cosine(e1, e2), kCosT1T2, 1e-12);
  EXPECT_NEAR(cosine(e1, e3), kCosT1T3, 1e-12);
  EXPECT_NEAR(cosine(e2, e3), kCosT2T3, 1e-12);
  EXPECT_GT(cosine(e1, e2), cosine(e1, e3));
}

TEST(Hashed, DeterministicAndUnitNorm) {
  EmbedderConfig cfg;
  std::mt19937 rng(23);
  for (int i = 0; i < 500; ++i) {
    std::string s;
    auto words = 1 + rng() % 12;
    for (std::size_t w = 0; w < words; ++w) {
      if (w) s += ' ';
      s += std::string(1 + rng() % 8, char('a' + rng() % 26));
      s.back() = char('a' + rng() % 26);
    }
    auto a = embed::embed(seq(s), cfg), b = embed::embed(seq(s), cfg);
    ASSERT_EQ(a, b);
    ASSERT_NEAR(a.norm(), 1.0, 1e-9) << s;
  }
}

TEST(Hashed, EmptyInputIsZeroVector) {
  EmbedderConfig cfg;
  auto v = embed::embed(logpipe::TokenSequence{}, cfg);
  ASSERT_EQ(v.dim(), cfg.dim);
  for (double x : v.values) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(v.norm(), 0.0);
}

TEST(Hashed, DependsOnlyOnJoinedString) {
  EmbedderConfig cfg;
  logpipe::TokenSequence a{{"apt", "get"}, "r1"}, b{{"apt", "get"}, "r2"};
  EXPECT_EQ(embed::embed(a, cfg), embed::embed(b, cfg));
  EXPECT_EQ(embed::embed(a, cfg), embed_hashed("apt get", cfg));
}

TEST(Hashed, ConfigValidation) {
  EmbedderConfig cfg;
  cfg.dim = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.ngram_min = 6;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.dim = 16;
  cfg.include_word_unigrams = false;
  auto v = embed_hashed("abc", cfg);
  EXPECT_EQ(v.dim(), 16u);
  // one 3-gram and nothing else: a single +-1 entry
  std::size_t nz = 0;
  for (double x : v.values) nz += x != 0.0;
  EXPECT_EQ(nz, 1u);
}

TEST(Distance, Examples) {
  EmbeddingVector e1{{1, 0, 0}}, e2{{0, 1, 0}}, neg{{-1, 0, 0}};
  EXPECT_EQ(distance(e1, e1), 0.0);
  EXPECT_DOUBLE_EQ(distance(e1, neg), 2.0);
  EXPECT_DOUBLE_EQ(distance(e1, e2), std::sqrt(2.0));
  EXPECT_THROW(distance(e1, EmbeddingVector{{1, 0}}), ValidationError);
}

TEST(Distance, MetricProperties) {
  std::mt19937 rng(29);
  std::normal_distribution<double> g;
  auto rnd = [&] {
    EmbeddingVector v{std::vector<double>(8)};
    for (auto& x : v.values) x = g(rng);
    l2_normalize(v.values);
    return v;
  };
  for (int i = 0; i < 1000; ++i) {
    auto a = rnd(), b = rnd(), c = rnd();
    ASSERT_DOUBLE_EQ(distance(a, b), distance(b, a));
    ASSERT_LE(distance(a, c), distance(a, b) + distance(b, c) + 1e-12);
    // on unit vectors d^2 = 2 - 2cos
    ASSERT_NEAR(distance(a, b) * distance(a, b), 2 - 2 * cosine(a, b), 1e-12);
  }
}

TEST(Remote, PostsTextsAndNormalizes) {
  testsupport::StubServer stub;
  std::string seen;
  stub.server().Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    seen = req.body;
    res.set_content(R"({"vectors": [[3, 4, 0, 0], [0, 0, 0, 2]]})", "application/json");
  });
  stub.start();
  EmbedderConfig cfg;
  cfg.kind = EmbedderKind::Remote;
  cfg.dim = 4;
  cfg.remote_url = stub.url();
  std::vector<logpipe::TokenSequence> batch{{{"a", "b"}, ""}, {{"c"}, ""}};
  auto out = embed_all(batch, cfg);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_DOUBLE_EQ(out[0].values[0], 0.6);
  EXPECT_DOUBLE_EQ(out[0].values[1], 0.8);
  EXPECT_DOUBLE_EQ(out[1].values[3], 1.0);
  EXPECT_NE(seen.find("\"texts\""), std::string::npos);
  EXPECT_NE(seen.find("\"a b\""), std::string::npos);
}

TEST(Remote, DimensionMismatchIsProtocolError) {
  testsupport::StubServer stub;
  stub.server().Post("/embed", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"vectors": [[1, 2, 3]]})", "application/json");
  });
  stub.start();
  EmbedderConfig cfg;
  cfg.kind = EmbedderKind::Remote;
  cfg.dim = 4;
  cfg.remote_url = stub.url();
  EXPECT_THROW(embed::embed(logpipe::TokenSequence{{"x"}, ""}, cfg), ProtocolError);
}

TEST(Remote, UnreachableIsTransportError) {
  EmbedderConfig cfg;
  cfg.kind = EmbedderKind::Remote;
  cfg.remote_url = "http://127.0.0.1:1";
  cfg.remote_timeout_s = 1;
  EXPECT_THROW(embed::embed(logpipe::TokenSequence{{"x"}, ""}, cfg), TransportError);
}
