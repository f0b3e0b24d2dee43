// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dockwright::search {

inline constexpr std::size_t kMaxKeywords = 12;
inline constexpr std::size_t kMaxResults = 5;

struct SearchQuery {
  std::vector<std::string> keywords;  // 1..12
  std::string query_string;           // "dockerfile " + keywords

  /// Throws ValidationError when `keywords` is empty; keeps the first 12.
  static SearchQuery from_keywords(std::vector<std::string> keywords);
};

struct SearchResult {
  std::string url;
  std::string title;
  std::string source_domain;

  bool operator==(const SearchResult&) const = default;
};

/// Markers that make a log line "error-bearing" (substring, case-insensitive).
const std::vector<std::string>& default_error_markers();
const std::vector<std::string>& stop_words();
const std::vector<std::string>& default_allowlist();

/// Keywords from the last error-bearing line of the log (or the last
/// non-blank line when none carries a marker). Drops stop-words, tokens
/// shorter than two characters, pure numbers, hex strings of six or more
/// characters and path-like words; dedupes in order; keeps at most `max_k`.
/// Throws ValidationError if max_k == 0.
std::vector<std::string> extract_keywords(
    std::string_view log, std::size_t max_k = kMaxKeywords,
    const std::vector<std::string>& markers = default_error_markers());

/// Host part of a URL, lowercased ("https://a.b/c" -> "a.b").
std::string url_host(std::string_view url);

/// True when the URL falls under an allowlist entry. An entry is a host,
/// optionally followed by a path glob where `*` spans one or more segments:
/// "github.com/*/issues" admits "https://github.com/o/r/issues/7".
/// Hosts match exactly or as a subdomain.
bool allowlisted(std::string_view url, const std::vector<std::string>& allowlist);

/// Keeps allowlisted results in backend order, at most five.
std::vector<SearchResult> filter_results(const std::vector<SearchResult>& ranked,
                                         const std::vector<std::string>& allowlist);

/// Parses a backend reply: a JSON array of {url,title} or {"results": [...]}.
/// Throws ProtocolError on anything else.
std::vector<SearchResult> parse_backend_reply(std::string_view body);

/// HTTP client for the search backend: GET <base>/search?q=<query>.
class SearchClient {
 public:
  SearchClient(std::string backend_url, std::vector<std::string> allowlist = default_allowlist(),
               double timeout_s = 20.0);

  /// Throws TransportError when the backend is unreachable; an empty list
  /// after filtering is not an error.
  std::vector<SearchResult> top5(const SearchQuery& query) const;

  const std::string& backend_url() const { return backend_url_; }
  const std::vector<std::string>& allowlist() const { return allowlist_; }

 private:
  std::string backend_url_;
  std::vector<std::string> allowlist_;
  double timeout_s_;
};

}  // namespace dockwright::search
