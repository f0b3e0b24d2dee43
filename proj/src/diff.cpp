// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include "dockwright/diff.hpp"

#include <algorithm>

namespace dockwright::diff {

namespace {

enum class Tag { Keep, Del, Add };

struct Line {
  Tag tag;
  std::string_view text;
  std::size_t a;  // 1-based line numbers of the position in each file
  std::size_t b;
};

std::vector<Line> script(const std::vector<std::string_view>& a,
                         const std::vector<std::string_view>& b) {
  // Trim the common prefix and suffix so the quadratic table stays small.
  std::size_t pre = 0;
  while (pre < a.size() && pre < b.size() && a[pre] == b[pre]) ++pre;
  std::size_t suf = 0;
  while (suf < a.size() - pre && suf < b.size() - pre &&
         a[a.size() - 1 - suf] == b[b.size() - 1 - suf])
    ++suf;
  const std::size_t n = a.size() - pre - suf, m = b.size() - pre - suf;
  std::vector<std::uint32_t> lcs((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return lcs[i * (m + 1) + j]; };
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      at(i, j) = a[pre + i] == b[pre + j] ? at(i + 1, j + 1) + 1
                                          : std::max(at(i + 1, j), at(i, j + 1));
  std::vector<Line> out;
  for (std::size_t k = 0; k < pre; ++k) out.push_back({Tag::Keep, a[k], k + 1, k + 1});
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[pre + i] == b[pre + j]) {
      out.push_back({Tag::Keep, a[pre + i], pre + i + 1, pre + j + 1});
      ++i, ++j;
    } else if (j < m && (i == n || at(i, j + 1) > at(i + 1, j))) {
      out.push_back({Tag::Add, b[pre + j], pre + i + 1, pre + j + 1});
      ++j;
    } else {
      out.push_back({Tag::Del, a[pre + i], pre + i + 1, pre + j + 1});
      ++i;
    }
  }
  for (std::size_t k = 0; k < suf; ++k) {
    auto ai = a.size() - suf + k, bi = b.size() - suf + k;
    out.push_back({Tag::Keep, a[ai], ai + 1, bi + 1});
  }
  return out;
}

std::string range(std::size_t start, std::size_t count) {
  if (count == 1) return std::to_string(start);
  return std::to_string(count == 0 ? start - 1 : start) + "," + std::to_string(count);
}

}  // namespace

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    auto end = nl == std::string_view::npos ? text.size() : nl + 1;
    lines.push_back(text.substr(start, end - start));
    start = end;
  }
  return lines;
}

std::string unified_diff(std::string_view before, std::string_view after,
                         std::string_view before_label, std::string_view after_label,
                         std::size_t context) {
  if (before == after) return {};
  auto a = split_lines(before), b = split_lines(after);
  auto lines = script(a, b);

  std::string out;
  out += "--- ";
  out += before_label;
  out += "\n+++ ";
  out += after_label;
  out += "\n";

  std::size_t k = 0;
  while (k < lines.size()) {
    auto first_change = k;
    while (first_change < lines.size() && lines[first_change].tag == Tag::Keep) ++first_change;
    if (first_change == lines.size()) break;
    auto start = first_change > context ? first_change - context : 0;
    start = std::max(start, k);
    // Extend the hunk while changes are within 2*context of each other.
    auto end = first_change;
    auto last_change = first_change;
    while (end < lines.size()) {
      if (lines[end].tag != Tag::Keep) {
        last_change = end;
      } else if (end - last_change > 2 * context) {
        break;
      }
      ++end;
    }
    end = std::min(lines.size(), last_change + context + 1);

    std::size_t a_count = 0, b_count = 0;
    for (auto x = start; x < end; ++x) {
      if (lines[x].tag != Tag::Add) ++a_count;
      if (lines[x].tag != Tag::Del) ++b_count;
    }
    out += "@@ -" + range(lines[start].a, a_count) + " +" + range(lines[start].b, b_count) + " @@\n";
    for (auto x = start; x < end; ++x) {
      out.push_back(lines[x].tag == Tag::Keep ? ' ' : lines[x].tag == Tag::Del ? '-' : '+');
      out += lines[x].text;
      if (lines[x].text.empty() || lines[x].text.back() != '\n')
        out += "\n\\ No newline at end of file\n";
    }
    k = end;
  }
  return out;
}

}  // namespace dockwright::diff
