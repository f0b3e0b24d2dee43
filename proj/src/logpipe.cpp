// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include "dockwright/logpipe.hpp"

#include <cctype>
#include <string_view>

#include "dockwright/errors.hpp"

namespace dockwright::logpipe {

namespace {

constexpr std::string_view kDelimiters = "_-/\\.:;,=()[]{}<>|&\"'!";

bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_blank_line(std::string_view line) {
  for (char c : line)
    if (!is_ws(c)) return false;
  return true;
}

std::vector<std::string_view> non_blank_lines(std::string_view log) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= log.size()) {
    auto nl = log.find('\n', pos);
    auto line = log.substr(pos, nl == std::string_view::npos ? log.npos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!is_blank_line(line)) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

char lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return is_upper(c) || is_lower(c); }

// Inserts a space at camel-case humps: "fooBar" -> "foo Bar",
// "HTTPServer" -> "HTTP Server".
std::string mark_camel(std::string_view text) {
  std::string out;
  out.reserve(text.size() + text.size() / 4);
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (i > 0 && is_upper(c)) {
      char prev = text[i - 1];
      bool next_lower = i + 1 < text.size() && is_lower(text[i + 1]);
      if (is_lower(prev) || (is_upper(prev) && next_lower)) out.push_back(' ');
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string TokenSequence::joined() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

bool is_delimiter(char c) { return kDelimiters.find(c) != std::string_view::npos; }

LogTail tail_error_log(std::string_view stderr_log, std::string_view stdout_log,
                       std::size_t k) {
  if (k == 0) throw ValidationError("tail length k must be >= 1");
  LogTail tail;
  auto lines = non_blank_lines(stderr_log);
  if (lines.empty()) {
    lines = non_blank_lines(stdout_log);
    tail.from_stdout = !lines.empty();
  }
  std::size_t first = lines.size() > k ? lines.size() - k : 0;
  for (std::size_t i = first; i < lines.size(); ++i) {
    if (i > first) tail.text.push_back('\n');
    tail.text.append(lines[i]);
  }
  return tail;
}

std::string normalize(std::string_view text) {
  // Pass 1: lowercase, keep printable ASCII; other whitespace becomes ' '.
  std::string kept;
  kept.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    if (c == '\n') {
      kept.push_back('\n');
    } else if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') continue;
      kept.push_back('\n');
    } else if (c == '\t' || c == '\v' || c == '\f') {
      kept.push_back(' ');
    } else if (c >= 0x20 && c < 0x7f) {
      kept.push_back(lower(static_cast<char>(c)));
    }
  }

  // Pass 2: collapse whitespace runs.
  std::string spaced;
  spaced.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size();) {
    if (kept[i] != ' ' && kept[i] != '\n') {
      spaced.push_back(kept[i++]);
      continue;
    }
    std::size_t j = i;
    bool has_newline = false;
    while (j < kept.size() && (kept[j] == ' ' || kept[j] == '\n')) {
      has_newline = has_newline || kept[j] == '\n';
      ++j;
    }
    if (j - i == 1)
      spaced.push_back(kept[i]);
    else
      spaced.push_back(has_newline ? '\n' : ' ');
    i = j;
  }

  // Pass 3: collapse runs of >= 4 identical punctuation characters.
  std::string out;
  out.reserve(spaced.size());
  for (std::size_t i = 0; i < spaced.size();) {
    char c = spaced[i];
    std::size_t j = i + 1;
    while (j < spaced.size() && spaced[j] == c) ++j;
    if (std::ispunct(static_cast<unsigned char>(c)) && j - i >= 4)
      out.push_back(c);
    else
      out.append(spaced, i, j - i);
    i = j;
  }
  return out;
}

TokenSequence tokenize(std::string_view text) {
  TokenSequence seq;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) seq.tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    auto uc = static_cast<unsigned char>(c);
    if (is_ws(c) || uc < 0x20 || uc == 0x7f || is_delimiter(c)) {
      flush();
      continue;
    }
    if (!current.empty() && i > 0) {
      char prev = text[i - 1];
      bool camel = is_upper(c) && (is_lower(prev) ||
                                   (is_upper(prev) && i + 1 < text.size() &&
                                    is_lower(text[i + 1])));
      bool digit_to_letter = is_digit(prev) && is_alpha(c);
      if (camel || digit_to_letter) flush();
    }
    current.push_back(lower(c));
  }
  flush();
  return seq;
}

TokenSequence log_tokens(std::string_view raw_text) {
  return tokenize(normalize(mark_camel(raw_text)));
}

TokenSequence record_tokens(const BuildRecord& record, std::size_t k, bool* used_stdout) {
  auto tail = tail_error_log(record.stderr_log, record.stdout_log, k);
  if (used_stdout) *used_stdout = tail.from_stdout;
  auto seq = log_tokens(tail.text);
  seq.origin_record = record.record_id;
  return seq;
}

std::string rule_log_text(const BuildRecord& record) {
  std::string combined = record.stdout_log;
  if (!combined.empty() && !record.stderr_log.empty()) combined.push_back('\n');
  combined += record.stderr_log;
  return normalize(combined);
}

}  // namespace dockwright::logpipe
