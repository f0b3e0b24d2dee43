// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include "dockwright/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <sstream>
#include <unordered_map>

#include "dockwright/errors.hpp"

namespace dockwright {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 10> kFields = {
    "id",     "repo",    "dockerfile_path", "dockerfile", "stdout",
    "stderr", "outcome", "duration_s",      "captured_at", "meta"};

const std::string& require_string(const json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_string())
    throw ValidationError(std::string("field '") + key + "' must be a string");
  return v.get_ref<const std::string&>();
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  });
}

}  // namespace

std::string_view to_string(BuildOutcome outcome) {
  switch (outcome) {
    case BuildOutcome::Success: return "success";
    case BuildOutcome::Failure: return "failure";
    case BuildOutcome::Timeout: return "timeout";
    case BuildOutcome::Undetermined: return "undetermined";
  }
  return "undetermined";
}

std::optional<BuildOutcome> parse_outcome(std::string_view name) {
  if (name == "success") return BuildOutcome::Success;
  if (name == "failure") return BuildOutcome::Failure;
  if (name == "timeout") return BuildOutcome::Timeout;
  if (name == "undetermined") return BuildOutcome::Undetermined;
  return std::nullopt;
}

BuildOutcome classify_outcome(std::optional<int> exit_code, double duration,
                              bool daemon_error, double timeout_limit) {
  if (!(timeout_limit > 0.0))
    throw ValidationError("timeout_limit must be positive");
  if (duration >= timeout_limit) return BuildOutcome::Timeout;
  if (daemon_error) return BuildOutcome::Undetermined;
  if (!exit_code) return BuildOutcome::Undetermined;
  return *exit_code == 0 ? BuildOutcome::Success : BuildOutcome::Failure;
}

CorpusStats corpus_stats(std::span<const BuildRecord> records) {
  CorpusStats s;
  s.total = records.size();
  for (const auto& r : records) {
    switch (r.outcome) {
      case BuildOutcome::Success: ++s.successes; break;
      case BuildOutcome::Failure: ++s.failures; break;
      case BuildOutcome::Timeout: ++s.timeouts; break;
      case BuildOutcome::Undetermined: ++s.undetermined; break;
    }
  }
  s.breakage_rate =
      s.total == 0 ? 0.0 : static_cast<double>(s.failures) / static_cast<double>(s.total);
  return s;
}

BuildRecord parse_record_line(std::string_view line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("not a JSON object: ") + e.what());
  }
  if (!obj.is_object()) throw ValidationError("not a JSON object");
  for (auto key : kFields) {
    if (!obj.contains(std::string(key)))
      throw ValidationError("missing field '" + std::string(key) + "'");
  }
  for (const auto& [key, _] : obj.items()) {
    if (std::find(kFields.begin(), kFields.end(), key) == kFields.end())
      throw ValidationError("unknown field '" + key + "'");
  }

  BuildRecord r;
  r.record_id = require_string(obj, "id");
  if (r.record_id.empty()) throw ValidationError("field 'id' must be non-empty");
  r.repo_ref = require_string(obj, "repo");
  r.dockerfile_path = require_string(obj, "dockerfile_path");
  r.dockerfile_text = require_string(obj, "dockerfile");
  r.stdout_log = require_string(obj, "stdout");
  r.stderr_log = require_string(obj, "stderr");
  const auto& outcome_name = require_string(obj, "outcome");
  auto outcome = parse_outcome(outcome_name);
  if (!outcome) throw ValidationError("unknown outcome '" + outcome_name + "'");
  r.outcome = *outcome;
  const auto& duration = obj.at("duration_s");
  if (!duration.is_number()) throw ValidationError("field 'duration_s' must be a number");
  r.duration = duration.get<double>();
  if (!(r.duration >= 0.0)) throw ValidationError("field 'duration_s' must be >= 0");
  r.captured_at = require_string(obj, "captured_at");
  const auto& meta = obj.at("meta");
  if (!meta.is_object()) throw ValidationError("field 'meta' must be an object");
  for (const auto& [key, value] : meta.items()) {
    if (!value.is_string())
      throw ValidationError("meta value for '" + key + "' must be a string");
    r.meta.emplace(key, value.get<std::string>());
  }
  if (r.outcome != BuildOutcome::Undetermined && r.dockerfile_text.empty())
    throw ValidationError("field 'dockerfile' is empty for a determined outcome");
  return r;
}

std::string format_record_line(const BuildRecord& r) {
  json obj = {
      {"id", r.record_id},
      {"repo", r.repo_ref},
      {"dockerfile_path", r.dockerfile_path},
      {"dockerfile", r.dockerfile_text},
      {"stdout", r.stdout_log},
      {"stderr", r.stderr_log},
      {"outcome", std::string(to_string(r.outcome))},
      {"duration_s", r.duration},
      {"captured_at", r.captured_at},
      {"meta", r.meta},
  };
  return obj.dump(-1, ' ', false, json::error_handler_t::replace);
}

IngestResult ingest_corpus_text(std::string_view text) {
  IngestResult result;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (is_blank(line)) continue;
    BuildRecord record;
    try {
      record = parse_record_line(line);
    } catch (const ValidationError& e) {
      result.rejects.push_back({line_no, e.what()});
      continue;
    }
    auto [it, inserted] = seen.emplace(record.record_id, line_no);
    if (!inserted) {
      std::ostringstream msg;
      msg << "duplicate record id '" << record.record_id << "' on lines "
          << it->second << " and " << line_no;
      throw ValidationError(msg.str());
    }
    result.records.push_back(std::move(record));
  }
  return result;
}

IngestResult ingest_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read corpus file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path.string());
  return ingest_corpus_text(buf.str());
}

void persist_corpus(std::span<const BuildRecord> records,
                    const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    for (const auto& r : records) out << format_record_line(r) << '\n';
    if (!out) throw IoError("error while writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

CorpusWriter::CorpusWriter(const std::filesystem::path& path, bool truncate)
    : out_(path, std::ios::binary | (truncate ? std::ios::trunc : std::ios::app)) {
  if (!out_) throw IoError("cannot open corpus for writing: " + path.string());
}

void CorpusWriter::append(const BuildRecord& record) {
  auto line = format_record_line(record);
  std::lock_guard lock(mu_);
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw IoError("corpus append failed");
  ++written_;
}

std::size_t CorpusWriter::written() const {
  std::lock_guard lock(mu_);
  return written_;
}

const BuildRecord* find_record(std::span<const BuildRecord> records,
                               std::string_view record_id) {
  for (const auto& r : records)
    if (r.record_id == record_id) return &r;
  return nullptr;
}

}  // namespace dockwright
