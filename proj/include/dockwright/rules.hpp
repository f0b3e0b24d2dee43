// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dockwright/corpus.hpp"
#include "dockwright/dockerfile.hpp"
#include "dockwright/search.hpp"

namespace dockwright::rules {

using dockerfile::SourceSpan;

enum class Document { Static, Dynamic };

struct Capture {
  std::string text;
  SourceSpan span;
  Document document = Document::Static;

  bool operator==(const Capture&) const = default;
};

/// $i -> capture. Static groups are numbered first, starting at $0.
using Binding = std::map<std::size_t, Capture>;

/// A static regex over the Dockerfile and/or a dynamic regex over the
/// normalized log. Both use Perl syntax with "." not crossing newlines and
/// "^"/"$" anchoring at line boundaries. The dynamic regex may embed
/// `${N}` to require the literal text of static capture N.
class Pattern {
 public:
  Pattern() = default;

  /// Throws ValidationError on a bad regex, on neither side present, or on a
  /// `${N}` that names no static group.
  static Pattern compile(std::optional<std::string> static_re,
                         std::optional<std::string> dynamic_re);

  /// Both present sides must match (first match wins on each side).
  std::optional<Binding> match(std::string_view dockerfile_text,
                               std::string_view log_text) const;

  const std::optional<std::string>& static_re() const { return static_re_; }
  const std::optional<std::string>& dynamic_re() const { return dynamic_re_; }
  std::size_t static_groups() const { return static_groups_; }
  std::size_t dynamic_groups() const { return dynamic_groups_; }
  std::size_t total_groups() const { return static_groups_ + dynamic_groups_; }

  /// Span of the whole static match, if the static side matches.
  std::optional<SourceSpan> static_match_span(std::string_view dockerfile_text) const;

  struct Compiled;

 private:
  std::optional<std::string> static_re_;
  std::optional<std::string> dynamic_re_;
  std::size_t static_groups_ = 0;
  std::size_t dynamic_groups_ = 0;
  std::shared_ptr<const Compiled> compiled_;
};

enum class OpKind { Replace, InsertAfter, Remove };

std::string_view to_string(OpKind op);

/// `target` is "$i" or an instruction selector: "KIND" (first instruction of
/// that kind) or "KIND:/regex/" (first instruction of that kind whose text
/// matches; replace/remove then act on the regex match only). Selector
/// regexes may embed `${N}` captures. `text` may interpolate `$N`; "$$" is
/// a literal dollar.
struct EditOp {
  OpKind op = OpKind::Replace;
  std::string target;
  std::string text;

  bool operator==(const EditOp&) const = default;
};

using EditScript = std::vector<EditOp>;

struct RuleFixture {
  std::string dockerfile;
  std::string log;  // raw; normalized before matching

  bool operator==(const RuleFixture&) const = default;
};

struct RepairRule {
  std::string id;
  Pattern pattern;
  std::vector<EditScript> solutions;
  std::string source_url;
  std::string notes;
  std::optional<int> parent_cluster;
  std::vector<RuleFixture> fixtures;
};

struct Suggestion {
  std::string id;
  Pattern pattern;
  std::string message;
  std::string kind;  // instruction kind the advice is about, e.g. "RUN"
  std::optional<int> parent_cluster;
};

/// Order is match precedence; repairs are always tried before suggestions.
struct RuleDb {
  std::vector<RepairRule> repairs;
  std::vector<Suggestion> suggestions;
  std::uint64_t version = 0;

  const RepairRule* find_repair(std::string_view id) const;
  const Suggestion* find_suggestion(std::string_view id) const;
};

// --- persistence ---------------------------------------------------------

/// Throws ValidationError naming the rule on any defect (bad regex,
/// duplicate id, unknown op, dangling $i, fixture that does not apply).
RuleDb rules_from_json(std::string_view text);
std::string rules_to_json(const RuleDb& db);
RuleDb load_rules(const std::filesystem::path& path);
/// Writes db with version + 1, atomically. Returns the new version.
std::uint64_t save_rules(const RuleDb& db, const std::filesystem::path& path);

/// Single entries, same wire format as inside the db file.
RepairRule repair_from_json(std::string_view text);
Suggestion suggestion_from_json(std::string_view text);
std::string repair_to_json(const RepairRule& rule);
std::string suggestion_to_json(const Suggestion& s);

// --- matching and application -------------------------------------------

inline std::optional<Binding> match_rule(const Pattern& pattern, std::string_view dockerfile_text,
                                         std::string_view log_text) {
  return pattern.match(dockerfile_text, log_text);
}

/// `$N` interpolation. Throws ApplicationError on a missing capture.
std::string interpolate(std::string_view tmpl, const Binding& binding);

/// Compiles the script to span edits and splices them in. Throws
/// ApplicationError for missing bindings, dynamic targets, unresolved
/// selectors or overlapping edits.
std::string apply_solution(std::string_view dockerfile_text, const EditScript& script,
                           const Binding& binding);

struct Variant {
  std::string rule_id;
  std::size_t solution_index = 0;
  std::string text;
};

enum class OutcomeKind { Repaired, Suggested, SearchFallback };

std::string_view to_string(OutcomeKind kind);

struct RepairOutcome {
  OutcomeKind kind = OutcomeKind::SearchFallback;
  // Repaired
  std::string rule_id;
  std::vector<Variant> variants;
  std::vector<std::string> failed_solutions;
  // Suggested
  std::string suggestion_id;
  std::string message;
  std::optional<SourceSpan> suggestion_span;
  // SearchFallback
  std::vector<std::string> keywords;
  std::string query_string;
  std::vector<search::SearchResult> results;
  std::string search_error;
};

/// Repair/suggestion lookup on raw documents; never searches. The log is
/// normalized here.
RepairOutcome diagnose(std::string_view dockerfile_text, std::string_view raw_log,
                       const RuleDb& db);

/// Repairs first (a rule counts only if one of its solutions applies), then
/// suggestions, then the search fallback. `client` may be null, in which
/// case the fallback carries the query but no results. Throws
/// ValidationError unless the record's outcome is Failure.
RepairOutcome repair(const BuildRecord& record, const RuleDb& db,
                     const search::SearchClient* client = nullptr);

struct DryRunReport {
  std::vector<std::string> matched_ids;
  std::size_t considered = 0;       // failing records examined
  std::optional<double> fraction;   // absent when considered == 0
};

/// Matches without applying anything; only Failure records are considered.
DryRunReport dry_run(const Pattern& pattern, std::span<const BuildRecord> records);

/// The rule file that ships with the tool (compiled in).
std::string_view builtin_rules_json();
RuleDb builtin_rules();

}  // namespace dockwright::rules
