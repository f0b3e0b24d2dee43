// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dockwright/corpus.hpp"

namespace dockwright::logpipe {

inline constexpr std::size_t kDefaultTailLines = 15;

struct TokenSequence {
  std::vector<std::string> tokens;
  std::string origin_record;

  std::string joined() const;
};

struct LogTail {
  std::string text;
  bool from_stdout = false;  // stderr was empty, stdout was used instead
};

/// Last `k` non-blank lines of the error log, newline-joined. Falls back to
/// stdout when stderr has no non-blank line. Throws ValidationError if k == 0.
LogTail tail_error_log(std::string_view stderr_log, std::string_view stdout_log,
                       std::size_t k = kDefaultTailLines);

/// Lowercases, strips non-printable-ASCII bytes, collapses whitespace runs
/// and runs of four or more identical punctuation characters. Line breaks
/// survive: a whitespace run that contains one becomes a single "\n".
std::string normalize(std::string_view text);

/// Splits on whitespace, the delimiter set, camel-case humps and
/// digit-to-letter boundaries; emits lowercase, non-empty tokens.
TokenSequence tokenize(std::string_view text);

bool is_delimiter(char c);

/// Full log-to-token path used for embeddings: camel-case humps are marked
/// before normalization lowercases them away.
TokenSequence log_tokens(std::string_view raw_text);

/// Tail + tokens for a record.
TokenSequence record_tokens(const BuildRecord& record,
                            std::size_t k = kDefaultTailLines,
                            bool* used_stdout = nullptr);

/// Normalized combined log (stdout then stderr) that rule patterns match against.
std::string rule_log_text(const BuildRecord& record);

}  // namespace dockwright::logpipe
