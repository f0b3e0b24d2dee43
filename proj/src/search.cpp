// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include "dockwright/search.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "dockwright/errors.hpp"
#include "dockwright/logpipe.hpp"
#include "http_util.hpp"

namespace dockwright::search {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

bool all_digits(std::string_view t) {
  return !t.empty() && std::all_of(t.begin(), t.end(),
                                   [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool hexish(std::string_view t) {
  if (t.size() < 6) return false;
  bool digit = false;
  for (unsigned char c : t) {
    if (!std::isxdigit(c)) return false;
    digit = digit || std::isdigit(c);
  }
  return digit;
}

std::vector<std::string> split_segments(std::string_view path) {
  std::vector<std::string> segs;
  std::size_t pos = 0;
  while (pos < path.size()) {
    auto slash = path.find('/', pos);
    auto seg = path.substr(pos, slash == std::string_view::npos ? path.npos : slash - pos);
    if (!seg.empty()) segs.emplace_back(seg);
    if (slash == std::string_view::npos) break;
    pos = slash + 1;
  }
  return segs;
}

// Pattern segments must match a prefix of the URL's segments; "*" eats one
// or more segments.
bool glob_prefix(const std::vector<std::string>& pat, std::size_t pi,
                 const std::vector<std::string>& segs, std::size_t si) {
  if (pi == pat.size()) return true;
  if (pat[pi] == "*") {
    for (std::size_t take = 1; si + take <= segs.size(); ++take)
      if (glob_prefix(pat, pi + 1, segs, si + take)) return true;
    return false;
  }
  if (si >= segs.size() || lowercase(segs[si]) != lowercase(pat[pi])) return false;
  return glob_prefix(pat, pi + 1, segs, si + 1);
}

std::string url_path(std::string_view url) {
  auto scheme = url.find("://");
  auto start = scheme == std::string_view::npos ? 0 : scheme + 3;
  auto slash = url.find('/', start);
  if (slash == std::string_view::npos) return "";
  auto path = url.substr(slash);
  auto cut = path.find_first_of("?#");
  return std::string(path.substr(0, cut));
}

}  // namespace

SearchQuery SearchQuery::from_keywords(std::vector<std::string> keywords) {
  if (keywords.empty()) throw ValidationError("a search query needs at least one keyword");
  if (keywords.size() > kMaxKeywords) keywords.resize(kMaxKeywords);
  SearchQuery q;
  q.query_string = "dockerfile";
  for (const auto& k : keywords) q.query_string += " " + k;
  q.keywords = std::move(keywords);
  return q;
}

const std::vector<std::string>& default_error_markers() {
  static const std::vector<std::string> markers = {"error", "fatal", "unable", "failed",
                                                   "cannot"};
  return markers;
}

const std::vector<std::string>& stop_words() {
  static const std::vector<std::string> words = {
      "a",     "an",    "the",   "and",    "or",    "but",   "if",    "then", "else",
      "of",    "to",    "in",    "on",     "at",    "by",    "for",   "with", "from",
      "as",    "is",    "are",   "was",    "were",  "be",    "been",  "being", "it",
      "its",   "this",  "that",  "these",  "those", "not",   "no",    "your", "you",
      "we",    "our",   "can",   "could",  "should", "would", "will", "do",   "does",
      "did",   "has",   "have",  "had",    "there"};
  return words;
}

const std::vector<std::string>& default_allowlist() {
  static const std::vector<std::string> list = {"stackoverflow.com", "forums.docker.com",
                                                "github.com/*/issues", "serverfault.com",
                                                "superuser.com"};
  return list;
}

std::vector<std::string> extract_keywords(std::string_view log, std::size_t max_k,
                                          const std::vector<std::string>& markers) {
  if (max_k == 0) throw ValidationError("max_k must be >= 1");
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < log.size()) {
    auto nl = log.find('\n', pos);
    auto line = log.substr(pos, nl == std::string_view::npos ? log.npos : nl - pos);
    if (!blank(line)) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (lines.empty()) return {};

  std::string_view chosen = lines.back();
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    auto lower = lowercase(*it);
    bool marked = std::any_of(markers.begin(), markers.end(), [&](const std::string& m) {
      return lower.find(lowercase(m)) != std::string::npos;
    });
    if (marked) {
      chosen = *it;
      break;
    }
  }

  // Path-like words and hex ids go before tokenization splits them apart.
  std::string kept;
  std::size_t p = 0;
  while (p < chosen.size()) {
    while (p < chosen.size() && std::isspace(static_cast<unsigned char>(chosen[p]))) ++p;
    auto start = p;
    while (p < chosen.size() && !std::isspace(static_cast<unsigned char>(chosen[p]))) ++p;
    auto word = chosen.substr(start, p - start);
    if (word.empty() || word.find('/') != std::string_view::npos || hexish(word)) continue;
    kept.append(word);
    kept.push_back(' ');
  }

  const auto& stops = stop_words();
  std::unordered_set<std::string> seen;
  std::vector<std::string> out;
  for (auto& tok : logpipe::log_tokens(kept).tokens) {
    if (tok.size() < 2 || all_digits(tok)) continue;
    if (std::find(stops.begin(), stops.end(), tok) != stops.end()) continue;
    if (!seen.insert(tok).second) continue;
    out.push_back(std::move(tok));
    if (out.size() == max_k) break;
  }
  return out;
}

std::string url_host(std::string_view url) {
  auto scheme = url.find("://");
  auto start = scheme == std::string_view::npos ? 0 : scheme + 3;
  auto end = url.find_first_of("/?#", start);
  auto host = url.substr(start, end == std::string_view::npos ? url.npos : end - start);
  if (auto at = host.rfind('@'); at != std::string_view::npos) host.remove_prefix(at + 1);
  if (auto colon = host.find(':'); colon != std::string_view::npos) host = host.substr(0, colon);
  return lowercase(host);
}

bool allowlisted(std::string_view url, const std::vector<std::string>& allowlist) {
  auto host = url_host(url);
  if (host.empty()) return false;
  auto segs = split_segments(url_path(url));
  for (const auto& entry : allowlist) {
    auto slash = entry.find('/');
    auto entry_host = lowercase(std::string_view(entry).substr(0, slash));
    bool host_ok = host == entry_host ||
                   (host.size() > entry_host.size() &&
                    host.ends_with("." + entry_host));
    if (!host_ok) continue;
    if (slash == std::string::npos) return true;
    auto pat = split_segments(std::string_view(entry).substr(slash));
    if (glob_prefix(pat, 0, segs, 0)) return true;
  }
  return false;
}

std::vector<SearchResult> filter_results(const std::vector<SearchResult>& ranked,
                                         const std::vector<std::string>& allowlist) {
  std::vector<SearchResult> out;
  for (const auto& r : ranked) {
    if (!allowlisted(r.url, allowlist)) continue;
    auto kept = r;
    kept.source_domain = url_host(r.url);
    out.push_back(std::move(kept));
    if (out.size() == kMaxResults) break;
  }
  return out;
}

std::vector<SearchResult> parse_backend_reply(std::string_view body) {
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("search backend reply is not JSON: ") + e.what());
  }
  const nlohmann::json* list = &reply;
  if (reply.is_object() && reply.contains("results")) list = &reply["results"];
  if (!list->is_array()) throw ProtocolError("search backend reply is not a result list");
  std::vector<SearchResult> out;
  for (const auto& item : *list) {
    if (!item.is_object() || !item.contains("url") || !item["url"].is_string())
      throw ProtocolError("search result without a url");
    SearchResult r;
    r.url = item["url"].get<std::string>();
    if (item.contains("title") && item["title"].is_string())
      r.title = item["title"].get<std::string>();
    r.source_domain = url_host(r.url);
    out.push_back(std::move(r));
  }
  return out;
}

SearchClient::SearchClient(std::string backend_url, std::vector<std::string> allowlist,
                           double timeout_s)
    : backend_url_(std::move(backend_url)),
      allowlist_(std::move(allowlist)),
      timeout_s_(timeout_s) {}

std::vector<SearchResult> SearchClient::top5(const SearchQuery& query) const {
  if (backend_url_.empty()) throw ConfigError("no search backend configured");
  auto base = detail::split_base_url(backend_url_);
  httplib::Client client(base.origin);
  auto secs = static_cast<time_t>(timeout_s_);
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  httplib::Params params{{"q", query.query_string}};
  auto res = client.Get(base.path_prefix + "/search", params, httplib::Headers{});
  if (!res)
    throw TransportError("search backend unreachable at " + backend_url_ + ": " +
                         httplib::to_string(res.error()));
  if (res->status != 200)
    throw TransportError("search backend answered HTTP " + std::to_string(res->status));
  return filter_results(parse_backend_reply(res->body), allowlist_);
}

}  // namespace dockwright::search
