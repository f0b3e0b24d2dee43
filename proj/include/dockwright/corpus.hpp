// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dockwright {

enum class BuildOutcome { Success, Failure, Timeout, Undetermined };

/// Wire name used in corpus files ("success", "failure", ...).
std::string_view to_string(BuildOutcome outcome);
std::optional<BuildOutcome> parse_outcome(std::string_view name);

/// Default build time limit: thirty minutes.
inline constexpr double kDefaultTimeoutSeconds = 1800.0;

/// One Dockerfile build attempt. Logs are kept exactly as captured.
struct BuildRecord {
  std::string record_id;
  std::string repo_ref;
  std::string dockerfile_path;
  std::string dockerfile_text;
  std::string stdout_log;
  std::string stderr_log;
  BuildOutcome outcome = BuildOutcome::Undetermined;
  double duration = 0.0;
  std::string captured_at;
  std::map<std::string, std::string> meta;

  bool operator==(const BuildRecord&) const = default;
};

struct CorpusStats {
  std::size_t total = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::size_t timeouts = 0;
  std::size_t undetermined = 0;
  // failures / total; timeouts and undetermined builds count as not broken.
  double breakage_rate = 0.0;
};

struct RejectedLine {
  std::size_t line_number = 0;  // 1-based
  std::string reason;
};

struct IngestResult {
  std::vector<BuildRecord> records;
  std::vector<RejectedLine> rejects;
};

/// Decides the outcome of a finished (or killed) build.
///
/// Precedence is fixed: a build that ran for at least `timeout_limit` is a
/// Timeout no matter what else happened; otherwise a daemon-internal error
/// makes it Undetermined; otherwise the exit code decides. A missing exit
/// code without either of the former facts is also Undetermined.
/// Throws ValidationError when timeout_limit <= 0.
BuildOutcome classify_outcome(std::optional<int> exit_code, double duration,
                              bool daemon_error,
                              double timeout_limit = kDefaultTimeoutSeconds);

CorpusStats corpus_stats(std::span<const BuildRecord> records);

/// Parses one corpus line. Throws ValidationError describing the defect.
BuildRecord parse_record_line(std::string_view line);
std::string format_record_line(const BuildRecord& record);

/// Reads a line-delimited corpus file. Blank lines are skipped; malformed
/// lines land in `rejects`. Throws IoError when the file cannot be read and
/// ValidationError on duplicate record ids.
IngestResult ingest_corpus(const std::filesystem::path& path);
IngestResult ingest_corpus_text(std::string_view text);

/// Writes records in corpus format, replacing the file atomically.
void persist_corpus(std::span<const BuildRecord> records,
                    const std::filesystem::path& path);

/// Single-writer appender used while builds are still running.
class CorpusWriter {
 public:
  explicit CorpusWriter(const std::filesystem::path& path, bool truncate = false);

  void append(const BuildRecord& record);
  std::size_t written() const;

 private:
  mutable std::mutex mu_;
  std::ofstream out_;
  std::size_t written_ = 0;
};

const BuildRecord* find_record(std::span<const BuildRecord> records,
                               std::string_view record_id);

}  // namespace dockwright
