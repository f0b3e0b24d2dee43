// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#pragma once

#include <json.hpp>

#include <string>

#include "dockwright/rules.hpp"
#include "dockwright/search.hpp"

namespace dockwright::detail {

nlohmann::json result_json(const search::SearchResult& s);

/// Outcome of a repair run as sent over the wire. Variant diffs are
/// labelled a/<path> and b/<path>.
nlohmann::json outcome_json(std::string_view dockerfile_text, const std::string& path,
                            const rules::RepairOutcome& outcome);

}  // namespace dockwright::detail
