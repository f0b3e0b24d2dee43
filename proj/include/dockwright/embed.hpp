// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dockwright/logpipe.hpp"

namespace dockwright::embed {

inline constexpr std::size_t kDefaultDim = 256;

/// Unit-norm vector, or the zero vector for empty input.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  double norm() const;
  bool operator==(const EmbeddingVector&) const = default;
};

enum class EmbedderKind { HashedNgram, Remote };

struct EmbedderConfig {
  EmbedderKind kind = EmbedderKind::HashedNgram;
  std::size_t dim = kDefaultDim;
  std::size_t ngram_min = 3;
  std::size_t ngram_max = 5;
  bool include_word_unigrams = true;
  std::string remote_url;   // base URL; the client POSTs to <base>/embed
  double remote_timeout_s = 30.0;

  /// Throws ValidationError when dim == 0, ngram_min == 0 or min > max.
  void validate() const;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// Hashed character n-grams (of the space-joined tokens) plus word unigrams.
/// Word features are keyed as "w:" + token so they never collide with an
/// n-gram (tokens cannot contain ':'). Each feature adds sign * log(1 + tf)
/// to bucket hash % dim, sign taken from bit 63; the sum is L2-normalized.
EmbeddingVector embed_hashed(std::string_view joined_tokens, const EmbedderConfig& cfg);

/// Dispatches on cfg.kind. The remote kind throws TransportError when the
/// service is unreachable and ProtocolError on a malformed response.
EmbeddingVector embed(const logpipe::TokenSequence& tokens, const EmbedderConfig& cfg);

/// Batch form; the remote kind sends one request for all texts.
std::vector<EmbeddingVector> embed_all(std::span<const logpipe::TokenSequence> batch,
                                       const EmbedderConfig& cfg);

/// In-place L2 normalization; zero vectors stay zero.
void l2_normalize(std::vector<double>& values);

/// Euclidean distance. Throws ValidationError on dimension mismatch.
double distance(const EmbeddingVector& a, const EmbeddingVector& b);
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace dockwright::embed
