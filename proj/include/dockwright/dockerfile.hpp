// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dockwright::dockerfile {

/// Half-open byte range [start, end) into a source text.
struct SourceSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool empty() const { return start == end; }
  bool contains(std::size_t offset) const { return start <= offset && offset < end; }
  bool operator==(const SourceSpan&) const = default;
};

/// One logical instruction. `kind` is the uppercased keyword for known
/// instructions, "COMMENT" for `#` lines and "UNKNOWN" otherwise.
///
/// `span` runs from the first byte of the first physical line through the
/// last byte before the final line terminator, so the newline that ends an
/// instruction belongs to the gap that follows it.
struct Instruction {
  std::string kind;
  std::string args_raw;
  SourceSpan span;

  bool operator==(const Instruction&) const = default;
};

struct DockerfileAst {
  std::string source;
  std::vector<Instruction> instructions;

  std::string_view text(const Instruction& ins) const {
    return std::string_view(source).substr(ins.span.start, ins.span.size());
  }
  /// Index of the instruction whose span contains `offset`, or npos.
  std::size_t instruction_at(std::size_t offset) const;
};

struct Edit {
  SourceSpan span;
  std::string replacement;
};

/// Total parser: never throws, keeps every byte.
DockerfileAst parse(std::string_view text);

std::string serialize(const DockerfileAst& ast);

/// Replaces each edit span with its replacement. Empty replacement removes,
/// an empty span inserts. Throws ValidationError naming the offending edits
/// when spans overlap, coincide as insertions, or leave the source.
std::string splice(std::string_view source, std::span<const Edit> edits);
inline std::string splice(const DockerfileAst& ast, std::span<const Edit> edits) {
  return splice(ast.source, edits);
}

/// Whitespace runs collapsed to one space, ends trimmed.
std::string normalize_args(std::string_view args);

bool is_known_keyword(std::string_view upper);

}  // namespace dockwright::dockerfile
