// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include "dockwright/dockerfile.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "dockwright/errors.hpp"

namespace dockwright::dockerfile {

namespace {

constexpr std::array<std::string_view, 18> kKeywords = {
    "ADD",  "ARG",        "CMD",  "COPY",  "ENTRYPOINT", "ENV",
    "EXPOSE", "FROM",     "HEALTHCHECK", "LABEL", "MAINTAINER", "ONBUILD",
    "RUN",  "SHELL",      "STOPSIGNAL", "USER", "VOLUME",     "WORKDIR"};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

struct PhysicalLine {
  std::size_t start;
  std::size_t content_end;  // excludes "\n" and a preceding "\r"
  std::size_t next;         // start of the following line
};

PhysicalLine line_at(std::string_view text, std::size_t pos) {
  auto nl = text.find('\n', pos);
  PhysicalLine line{pos, nl == std::string_view::npos ? text.size() : nl,
                    nl == std::string_view::npos ? text.size() : nl + 1};
  if (line.content_end > line.start && text[line.content_end - 1] == '\r')
    --line.content_end;
  return line;
}

std::size_t skip_space(std::string_view text, std::size_t pos, std::size_t end) {
  while (pos < end && is_space(text[pos])) ++pos;
  return pos;
}

bool blank(std::string_view text, const PhysicalLine& l) {
  return skip_space(text, l.start, l.content_end) == l.content_end;
}

bool comment(std::string_view text, const PhysicalLine& l) {
  auto p = skip_space(text, l.start, l.content_end);
  return p < l.content_end && text[p] == '#';
}

// Position of a trailing line-continuation backslash, or npos.
std::size_t continuation_at(std::string_view text, const PhysicalLine& l) {
  auto e = l.content_end;
  while (e > l.start && is_space(text[e - 1])) --e;
  if (e > l.start && text[e - 1] == '\\') return e - 1;
  return std::string_view::npos;
}

std::string rtrim(std::string s) {
  while (!s.empty() && is_space(s.back())) s.pop_back();
  return s;
}

}  // namespace

bool is_known_keyword(std::string_view upper) {
  return std::find(kKeywords.begin(), kKeywords.end(), upper) != kKeywords.end();
}

std::size_t DockerfileAst::instruction_at(std::size_t offset) const {
  auto it = std::upper_bound(
      instructions.begin(), instructions.end(), offset,
      [](std::size_t off, const Instruction& ins) { return off < ins.span.start; });
  if (it == instructions.begin()) return std::string::npos;
  --it;
  if (it->span.contains(offset) || (it->span.empty() && it->span.start == offset))
    return static_cast<std::size_t>(it - instructions.begin());
  return std::string::npos;
}

DockerfileAst parse(std::string_view text) {
  DockerfileAst ast;
  ast.source.assign(text);
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto line = line_at(text, pos);
    if (blank(text, line)) {
      pos = line.next;
      continue;
    }
    Instruction ins;
    ins.span.start = line.start;
    auto first = skip_space(text, line.start, line.content_end);
    if (text[first] == '#') {
      ins.kind = "COMMENT";
      ins.args_raw = std::string(text.substr(first + 1, line.content_end - first - 1));
      ins.span.end = line.content_end;
      ast.instructions.push_back(std::move(ins));
      pos = line.next;
      continue;
    }

    auto kw_end = first;
    while (kw_end < line.content_end && !is_space(text[kw_end])) ++kw_end;
    std::string keyword(text.substr(first, kw_end - first));
    std::transform(keyword.begin(), keyword.end(), keyword.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    bool known = is_known_keyword(keyword);
    ins.kind = known ? keyword : "UNKNOWN";

    std::string args;
    auto piece_start = known ? skip_space(text, kw_end, line.content_end) : first;
    auto current = line;
    std::size_t span_end = line.content_end;
    while (true) {
      auto cont = continuation_at(text, current);
      auto piece_end = cont == std::string_view::npos ? current.content_end : cont;
      if (piece_end > piece_start) args.append(text.substr(piece_start, piece_end - piece_start));
      span_end = current.content_end;
      pos = current.next;
      if (cont == std::string_view::npos) break;
      // Blank and comment lines inside a continuation are skipped; they only
      // join the span if a real continuation line follows them.
      auto probe = current.next;
      bool found = false;
      while (probe < text.size()) {
        auto next = line_at(text, probe);
        if (blank(text, next) || comment(text, next)) {
          probe = next.next;
          continue;
        }
        current = next;
        piece_start = next.start;
        found = true;
        break;
      }
      if (!found) break;
    }
    ins.args_raw = rtrim(std::move(args));
    ins.span.end = span_end;
    ast.instructions.push_back(std::move(ins));
  }
  return ast;
}

std::string serialize(const DockerfileAst& ast) {
  std::string out;
  out.reserve(ast.source.size());
  std::string_view src(ast.source);
  std::size_t cursor = 0;
  for (const auto& ins : ast.instructions) {
    out.append(src.substr(cursor, ins.span.start - cursor));
    out.append(src.substr(ins.span.start, ins.span.size()));
    cursor = ins.span.end;
  }
  out.append(src.substr(cursor));
  return out;
}

std::string splice(std::string_view source, std::span<const Edit> edits) {
  std::ostringstream problems;
  bool bad = false;
  for (std::size_t i = 0; i < edits.size(); ++i) {
    const auto& s = edits[i].span;
    if (s.start > s.end || s.end > source.size()) {
      problems << " edit#" << i << "[" << s.start << "," << s.end << ") out of bounds;";
      bad = true;
    }
  }
  for (std::size_t i = 0; i < edits.size(); ++i) {
    for (std::size_t j = i + 1; j < edits.size(); ++j) {
      const auto& a = edits[i].span;
      const auto& b = edits[j].span;
      bool overlap = a.start < b.end && b.start < a.end;
      bool same_insertion = a.empty() && b.empty() && a.start == b.start;
      if (overlap || same_insertion) {
        problems << " edit#" << i << "[" << a.start << "," << a.end << ") conflicts with edit#"
                 << j << "[" << b.start << "," << b.end << ");";
        bad = true;
      }
    }
  }
  if (bad) throw ValidationError("invalid splice:" + problems.str());

  std::vector<const Edit*> order;
  order.reserve(edits.size());
  for (const auto& e : edits) order.push_back(&e);
  std::sort(order.begin(), order.end(), [](const Edit* a, const Edit* b) {
    if (a->span.start != b->span.start) return a->span.start > b->span.start;
    return a->span.end > b->span.end;
  });
  std::string out(source);
  for (const auto* e : order) out.replace(e->span.start, e->span.size(), e->replacement);
  return out;
}

std::string normalize_args(std::string_view args) {
  std::string out;
  bool pending_space = false;
  for (char c : args) {
    if (is_space(c) || c == '\n') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace dockwright::dockerfile
