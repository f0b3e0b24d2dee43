// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dockwright::diff {

/// Splits on '\n', keeping the terminator with each line. A final line
/// without a terminator is kept as is.
std::vector<std::string_view> split_lines(std::string_view text);

/// Unified diff of two texts (LCS over lines). Returns an empty string when
/// the texts are equal.
std::string unified_diff(std::string_view before, std::string_view after,
                         std::string_view before_label, std::string_view after_label,
                         std::size_t context = 3);

}  // namespace dockwright::diff
