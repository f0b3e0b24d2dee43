// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dockwright/cluster.hpp"
#include "dockwright/corpus.hpp"
#include "dockwright/rules.hpp"

namespace dockwright::metrics {

struct CoverageRow {
  std::string rule_id;
  std::size_t cluster_count = 0;          // clusters with at least one match
  std::optional<double> parent_coverage;  // absent when the parent is unknown
  double average_coverage = 0.0;          // over clusters with a match
  std::string warning;
};

/// `assignment.labels[i]` labels `records[i]`. Only Failure records count,
/// both in numerators and denominators. Rules that match nowhere get no row.
/// Throws ValidationError when the label and record counts differ.
std::vector<CoverageRow> repair_coverage(const rules::RuleDb& db,
                                         const cluster::ClusterAssignment& assignment,
                                         std::span<const BuildRecord> records);

struct ClusterProportion {
  int cluster_id = 0;
  std::size_t size = 0;  // failing members classified
  double repaired_frac = 0.0;
  double suggested_frac = 0.0;
  double unknown_frac = 0.0;
};

/// Per cluster with at least two failing members. Search fallbacks count as
/// unknown.
std::vector<ClusterProportion> solution_proportions(const rules::RuleDb& db,
                                                    const cluster::ClusterAssignment& assignment,
                                                    std::span<const BuildRecord> records);

enum class Equivalence { IdenticalRepair, SuggestionMatch, NoMatch };

std::string_view to_string(Equivalence tag);

struct EquivalenceVerdict {
  Equivalence tag = Equivalence::NoMatch;
  std::string detail;
};

/// What a fired suggestion points at in the broken file.
struct SuggestionHit {
  std::optional<dockerfile::SourceSpan> span;  // static match, if any
  std::string kind;                            // instruction kind from metadata
};

/// True when both files hold the same instructions in order, comparing
/// kinds and whitespace-normalized arguments and ignoring comments.
bool same_instructions(std::string_view a, std::string_view b);

/// Spans of instructions in `broken` that the developer changed or deleted,
/// plus the kinds of instructions the developer added.
struct TouchedSet {
  std::vector<dockerfile::SourceSpan> spans;
  std::vector<std::string> kinds;
};
TouchedSet touched_instructions(std::string_view broken, std::string_view developer);

EquivalenceVerdict patch_equivalence(std::string_view broken_text,
                                     const std::optional<std::string>& generated_variant,
                                     std::string_view developer_text,
                                     const std::optional<SuggestionHit>& suggestion = std::nullopt);

/// Runs the rule db on (broken, log) and compares every produced variant (or
/// the fired suggestion) against the developer's fix.
EquivalenceVerdict time_travel(std::string_view broken_text, std::string_view raw_log,
                               std::string_view developer_text, const rules::RuleDb& db);

std::string coverage_csv(std::span<const CoverageRow> rows);
std::string proportions_csv(std::span<const ClusterProportion> rows);
std::string coverage_text(std::span<const CoverageRow> rows);
std::string proportions_text(std::span<const ClusterProportion> rows);

}  // namespace dockwright::metrics
