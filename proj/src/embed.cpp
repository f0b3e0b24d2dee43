// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include "dockwright/embed.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cmath>
#include <map>
#include <unordered_map>

#include "dockwright/errors.hpp"
#include "http_util.hpp"

namespace dockwright::embed {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void add_feature(std::vector<double>& acc, std::string_view feature, std::size_t count) {
  auto h = fnv1a64(feature);
  auto bucket = static_cast<std::size_t>(h % acc.size());
  double sign = (h >> 63) == 0 ? 1.0 : -1.0;
  acc[bucket] += sign * std::log1p(static_cast<double>(count));
}

std::vector<EmbeddingVector> embed_remote(std::span<const logpipe::TokenSequence> batch,
                                          const EmbedderConfig& cfg) {
  if (cfg.remote_url.empty()) throw ValidationError("remote embedder needs a URL");
  auto base = detail::split_base_url(cfg.remote_url);
  nlohmann::json texts = nlohmann::json::array();
  for (const auto& seq : batch) texts.push_back(seq.joined());
  nlohmann::json body = {{"texts", texts}};

  httplib::Client client(base.origin);
  auto secs = static_cast<time_t>(cfg.remote_timeout_s);
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  auto res = client.Post(base.path_prefix + "/embed", body.dump(), "application/json");
  if (!res)
    throw TransportError("embedder unreachable at " + cfg.remote_url + ": " +
                         httplib::to_string(res.error()));
  if (res->status != 200)
    throw ProtocolError("embedder answered HTTP " + std::to_string(res->status));

  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("embedder reply is not JSON: ") + e.what());
  }
  if (!reply.is_object() || !reply.contains("vectors") || !reply["vectors"].is_array())
    throw ProtocolError("embedder reply lacks a 'vectors' array");
  const auto& vectors = reply["vectors"];
  if (vectors.size() != batch.size())
    throw ProtocolError("embedder returned " + std::to_string(vectors.size()) +
                        " vectors for " + std::to_string(batch.size()) + " texts");
  std::vector<EmbeddingVector> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (!v.is_array() || v.size() != cfg.dim)
      throw ProtocolError("embedder vector dimension mismatch: expected " +
                          std::to_string(cfg.dim));
    EmbeddingVector e;
    e.values.reserve(cfg.dim);
    for (const auto& x : v) {
      if (!x.is_number()) throw ProtocolError("embedder vector holds a non-number");
      e.values.push_back(x.get<double>());
    }
    l2_normalize(e.values);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

double EmbeddingVector::norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

void EmbedderConfig::validate() const {
  if (dim == 0) throw ValidationError("embedding dim must be > 0");
  if (ngram_min == 0 || ngram_min > ngram_max)
    throw ValidationError("ngram range must satisfy 1 <= min <= max");
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

void l2_normalize(std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) s += v * v;
  if (s == 0.0) return;
  double n = std::sqrt(s);
  for (double& v : values) v /= n;
}

EmbeddingVector embed_hashed(std::string_view joined, const EmbedderConfig& cfg) {
  cfg.validate();
  std::vector<double> acc(cfg.dim, 0.0);
  // std::map keeps accumulation order stable, which makes the floating-point
  // sum reproducible bit for bit.
  std::map<std::string_view, std::size_t> ngrams;
  for (std::size_t n = cfg.ngram_min; n <= cfg.ngram_max; ++n) {
    if (joined.size() < n) break;
    for (std::size_t i = 0; i + n <= joined.size(); ++i) ++ngrams[joined.substr(i, n)];
  }
  for (const auto& [gram, count] : ngrams) add_feature(acc, gram, count);

  if (cfg.include_word_unigrams) {
    std::map<std::string, std::size_t> words;
    std::size_t pos = 0;
    while (pos < joined.size()) {
      auto sp = joined.find(' ', pos);
      auto word = joined.substr(pos, sp == std::string_view::npos ? joined.npos : sp - pos);
      if (!word.empty()) ++words["w:" + std::string(word)];
      if (sp == std::string_view::npos) break;
      pos = sp + 1;
    }
    for (const auto& [word, count] : words) add_feature(acc, word, count);
  }
  l2_normalize(acc);
  return EmbeddingVector{std::move(acc)};
}

EmbeddingVector embed(const logpipe::TokenSequence& tokens, const EmbedderConfig& cfg) {
  if (cfg.kind == EmbedderKind::HashedNgram) return embed_hashed(tokens.joined(), cfg);
  cfg.validate();
  std::span<const logpipe::TokenSequence> one(&tokens, 1);
  return std::move(embed_remote(one, cfg).front());
}

std::vector<EmbeddingVector> embed_all(std::span<const logpipe::TokenSequence> batch,
                                       const EmbedderConfig& cfg) {
  cfg.validate();
  if (cfg.kind == EmbedderKind::Remote) {
    if (batch.empty()) return {};
    return embed_remote(batch, cfg);
  }
  std::vector<EmbeddingVector> out;
  out.reserve(batch.size());
  for (const auto& seq : batch) out.push_back(embed_hashed(seq.joined(), cfg));
  return out;
}

double distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim())
    throw ValidationError("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    double d = a.values[i] - b.values[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) throw ValidationError("dimension mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values[i] * b.values[i];
  double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (na * nb);
}

}  // namespace dockwright::embed
