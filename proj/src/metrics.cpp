// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include "dockwright/metrics.hpp"

#include <cstdio>
#include <map>

#include "dockwright/errors.hpp"
#include "dockwright/logpipe.hpp"

namespace dockwright::metrics {

namespace {

using ClusterMembers = std::map<int, std::vector<std::size_t>>;

ClusterMembers failing_members(const cluster::ClusterAssignment& assignment,
                               std::span<const BuildRecord> records) {
  if (assignment.labels.size() != records.size())
    throw ValidationError("assignment has " + std::to_string(assignment.labels.size()) +
                          " labels for " + std::to_string(records.size()) + " records");
  ClusterMembers members;
  for (std::size_t i = 0; i < records.size(); ++i) {
    int label = assignment.labels[i];
    if (label < 0 || records[i].outcome != BuildOutcome::Failure) continue;
    members[label].push_back(i);
  }
  return members;
}

struct Key {
  std::string kind;
  std::string args;
  bool operator==(const Key&) const = default;
};

struct Keyed {
  std::vector<Key> keys;
  std::vector<dockerfile::SourceSpan> spans;
};

Keyed keyed(std::string_view text) {
  auto ast = dockerfile::parse(text);
  Keyed out;
  for (const auto& ins : ast.instructions) {
    if (ins.kind == "COMMENT") continue;
    out.keys.push_back({ins.kind, dockerfile::normalize_args(ins.args_raw)});
    out.spans.push_back(ins.span);
  }
  return out;
}

bool overlaps(const dockerfile::SourceSpan& a, const dockerfile::SourceSpan& b) {
  if (a.empty()) return b.start <= a.start && a.start <= b.end;
  if (b.empty()) return a.start <= b.start && b.start <= a.end;
  return a.start < b.end && b.start < a.end;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<CoverageRow> repair_coverage(const rules::RuleDb& db,
                                         const cluster::ClusterAssignment& assignment,
                                         std::span<const BuildRecord> records) {
  auto clusters = failing_members(assignment, records);
  std::vector<std::string> logs(records.size());
  for (const auto& [label, idx] : clusters)
    for (auto i : idx) logs[i] = logpipe::rule_log_text(records[i]);

  std::vector<CoverageRow> rows;
  for (const auto& rule : db.repairs) {
    CoverageRow row;
    row.rule_id = rule.id;
    double sum = 0.0;
    std::optional<double> parent;
    for (const auto& [label, idx] : clusters) {
      std::size_t hits = 0;
      for (auto i : idx)
        if (rule.pattern.match(records[i].dockerfile_text, logs[i])) ++hits;
      double frac = static_cast<double>(hits) / static_cast<double>(idx.size());
      if (rule.parent_cluster && *rule.parent_cluster == label) parent = frac;
      if (hits == 0) continue;
      ++row.cluster_count;
      sum += frac;
    }
    if (row.cluster_count == 0) continue;
    row.average_coverage = sum / static_cast<double>(row.cluster_count);
    row.parent_coverage = parent;
    if (!rule.parent_cluster)
      row.warning = "rule declares no parent cluster";
    else if (!parent)
      row.warning = "parent cluster " + std::to_string(*rule.parent_cluster) +
                    " has no failing members in this assignment";
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ClusterProportion> solution_proportions(const rules::RuleDb& db,
                                                    const cluster::ClusterAssignment& assignment,
                                                    std::span<const BuildRecord> records) {
  std::vector<ClusterProportion> out;
  for (const auto& [label, idx] : failing_members(assignment, records)) {
    if (idx.size() < 2) continue;
    std::size_t repaired = 0, suggested = 0;
    for (auto i : idx) {
      const auto& r = records[i];
      std::string raw = r.stdout_log;
      if (!raw.empty() && !r.stderr_log.empty()) raw.push_back('\n');
      raw += r.stderr_log;
      auto outcome = rules::diagnose(r.dockerfile_text, raw, db);
      if (outcome.kind == rules::OutcomeKind::Repaired) ++repaired;
      if (outcome.kind == rules::OutcomeKind::Suggested) ++suggested;
    }
    ClusterProportion p;
    p.cluster_id = label;
    p.size = idx.size();
    auto n = static_cast<double>(idx.size());
    p.repaired_frac = static_cast<double>(repaired) / n;
    p.suggested_frac = static_cast<double>(suggested) / n;
    p.unknown_frac = static_cast<double>(idx.size() - repaired - suggested) / n;
    out.push_back(p);
  }
  return out;
}

std::string_view to_string(Equivalence tag) {
  switch (tag) {
    case Equivalence::IdenticalRepair: return "identical_repair";
    case Equivalence::SuggestionMatch: return "suggestion_match";
    case Equivalence::NoMatch: return "no_match";
  }
  return "no_match";
}

bool same_instructions(std::string_view a, std::string_view b) {
  return keyed(a).keys == keyed(b).keys;
}

TouchedSet touched_instructions(std::string_view broken, std::string_view developer) {
  auto a = keyed(broken), b = keyed(developer);
  const auto n = a.keys.size(), m = b.keys.size();
  std::vector<std::size_t> lcs((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return lcs[i * (m + 1) + j]; };
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      at(i, j) = a.keys[i] == b.keys[j] ? at(i + 1, j + 1) + 1
                                        : std::max(at(i + 1, j), at(i, j + 1));
  TouchedSet t;
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a.keys[i] == b.keys[j]) {
      ++i, ++j;
    } else if (j < m && (i == n || at(i, j + 1) > at(i + 1, j))) {
      t.kinds.push_back(b.keys[j].kind);
      ++j;
    } else {
      t.spans.push_back(a.spans[i]);
      t.kinds.push_back(a.keys[i].kind);
      ++i;
    }
  }
  return t;
}

EquivalenceVerdict patch_equivalence(std::string_view broken_text,
                                     const std::optional<std::string>& generated_variant,
                                     std::string_view developer_text,
                                     const std::optional<SuggestionHit>& suggestion) {
  if (generated_variant && same_instructions(*generated_variant, developer_text))
    return {Equivalence::IdenticalRepair, "generated variant equals the developer's file"};
  if (suggestion) {
    auto touched = touched_instructions(broken_text, developer_text);
    if (suggestion->span) {
      for (const auto& s : touched.spans)
        if (overlaps(s, *suggestion->span))
          return {Equivalence::SuggestionMatch,
                  "developer changed the instruction at bytes " + std::to_string(s.start) + "-" +
                      std::to_string(s.end) + " named by the suggestion"};
    } else if (!suggestion->kind.empty()) {
      for (const auto& k : touched.kinds)
        if (k == suggestion->kind)
          return {Equivalence::SuggestionMatch,
                  "developer changed a " + k + " instruction named by the suggestion"};
    }
  }
  return {Equivalence::NoMatch, generated_variant ? "generated variant differs from the fix"
                                                  : "no repair or matching suggestion"};
}

EquivalenceVerdict time_travel(std::string_view broken_text, std::string_view raw_log,
                               std::string_view developer_text, const rules::RuleDb& db) {
  auto outcome = rules::diagnose(broken_text, raw_log, db);
  if (outcome.kind == rules::OutcomeKind::Repaired) {
    EquivalenceVerdict last;
    for (const auto& v : outcome.variants) {
      last = patch_equivalence(broken_text, v.text, developer_text);
      if (last.tag == Equivalence::IdenticalRepair) {
        last.detail = "rule " + v.rule_id + " solution " + std::to_string(v.solution_index) +
                      " equals the developer's file";
        return last;
      }
    }
    return last;
  }
  if (outcome.kind == rules::OutcomeKind::Suggested) {
    const auto* s = db.find_suggestion(outcome.suggestion_id);
    SuggestionHit hit{outcome.suggestion_span, s ? s->kind : std::string()};
    return patch_equivalence(broken_text, std::nullopt, developer_text, hit);
  }
  return {Equivalence::NoMatch, "no repair or suggestion fired"};
}

std::string coverage_csv(std::span<const CoverageRow> rows) {
  std::string out = "rule_id,cluster_count,parent_coverage,average_coverage,warning\n";
  for (const auto& r : rows) {
    out += csv_field(r.rule_id) + "," + std::to_string(r.cluster_count) + "," +
           (r.parent_coverage ? fmt(*r.parent_coverage) : std::string()) + "," +
           fmt(r.average_coverage) + "," + csv_field(r.warning) + "\n";
  }
  return out;
}

std::string proportions_csv(std::span<const ClusterProportion> rows) {
  std::string out = "cluster_id,size,repaired_frac,suggested_frac,unknown_frac\n";
  for (const auto& p : rows)
    out += std::to_string(p.cluster_id) + "," + std::to_string(p.size) + "," +
           fmt(p.repaired_frac) + "," + fmt(p.suggested_frac) + "," + fmt(p.unknown_frac) + "\n";
  return out;
}

std::string coverage_text(std::span<const CoverageRow> rows) {
  if (rows.empty()) return "no rule matched any clustered failure\n";
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %8s %8s %8s\n", "rule", "clusters", "parent", "average");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-16s %8zu %8s %7.2f%%\n", r.rule_id.c_str(),
                  r.cluster_count,
                  r.parent_coverage ? (fmt(*r.parent_coverage * 100).substr(0, 6) + "%").c_str()
                                    : "n/a",
                  r.average_coverage * 100);
    out += line;
    if (!r.warning.empty()) out += "  warning: " + r.warning + "\n";
  }
  return out;
}

std::string proportions_text(std::span<const ClusterProportion> rows) {
  if (rows.empty()) return "no cluster with two or more failing members\n";
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %6s %9s %9s %9s\n", "cluster", "size", "repaired",
                "suggested", "unknown");
  out += line;
  for (const auto& p : rows) {
    std::snprintf(line, sizeof line, "%-8d %6zu %8.2f%% %8.2f%% %8.2f%%\n", p.cluster_id, p.size,
                  p.repaired_frac * 100, p.suggested_frac * 100, p.unknown_frac * 100);
    out += line;
  }
  return out;
}

}  // namespace dockwright::metrics
