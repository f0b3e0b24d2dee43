// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include "json_views.hpp"

#include "dockwright/diff.hpp"

namespace dockwright::detail {

using nlohmann::json;

json result_json(const search::SearchResult& s) {
  return {{"url", s.url}, {"title", s.title}, {"source_domain", s.source_domain}};
}

json outcome_json(std::string_view dockerfile_text, const std::string& path,
                  const rules::RepairOutcome& outcome) {
  const std::string label = path.empty() ? std::string("Dockerfile") : path;
  json variants = json::array();
  for (const auto& v : outcome.variants)
    variants.push_back(
        {{"rule_id", v.rule_id},
         {"solution_index", v.solution_index},
         {"diff", diff::unified_diff(dockerfile_text, v.text, "a/" + label, "b/" + label)},
         {"text", v.text}});
  json out = {{"kind", std::string(rules::to_string(outcome.kind))}, {"variants", variants}};
  if (outcome.kind == rules::OutcomeKind::Repaired) {
    out["rule_id"] = outcome.rule_id;
    out["failed_solutions"] = outcome.failed_solutions;
  } else if (outcome.kind == rules::OutcomeKind::Suggested) {
    json span = nullptr;
    if (outcome.suggestion_span)
      span = {{"start", outcome.suggestion_span->start}, {"end", outcome.suggestion_span->end}};
    out["suggestion"] = {{"id", outcome.suggestion_id}, {"message", outcome.message}, {"span", span}};
  } else {
    json results = json::array();
    for (const auto& s : outcome.results) results.push_back(result_json(s));
    out["search"] = {{"keywords", outcome.keywords},
                     {"query", outcome.query_string},
                     {"results", results},
                     {"error", outcome.search_error}};
  }
  return out;
}

}  // namespace dockwright::detail
