// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include "dockwright/rules.hpp"

#include <boost/regex.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "dockwright/errors.hpp"
#include "dockwright/logpipe.hpp"

namespace dockwright::rules {

using nlohmann::json;

namespace {

constexpr auto kRegexFlags = boost::regex_constants::perl | boost::regex_constants::no_mod_s;

boost::regex compile_regex(const std::string& source) {
  return boost::regex(source, kRegexFlags);
}

std::string regex_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size() * 2);
  for (char c : text) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' &&
        static_cast<unsigned char>(c) < 0x80)
      out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

struct CaptureRef {
  std::size_t pos;
  std::size_t len;
  std::size_t index;
};

// Finds `${N}` references in a regex source, skipping escaped "$".
std::vector<CaptureRef> find_refs(std::string_view re) {
  std::vector<CaptureRef> refs;
  for (std::size_t i = 0; i + 3 < re.size() + 1 && i < re.size(); ++i) {
    if (re[i] == '\\') {
      ++i;
      continue;
    }
    if (re[i] != '$' || i + 1 >= re.size() || re[i + 1] != '{') continue;
    auto j = i + 2;
    std::size_t value = 0;
    bool digits = false;
    while (j < re.size() && std::isdigit(static_cast<unsigned char>(re[j]))) {
      value = value * 10 + static_cast<std::size_t>(re[j] - '0');
      digits = true;
      ++j;
    }
    if (digits && j < re.size() && re[j] == '}') {
      refs.push_back({i, j + 1 - i, value});
      i = j;
    }
  }
  return refs;
}

// Replaces `${N}` with the escaped capture text; nullopt if a capture is missing.
std::optional<std::string> substitute_refs(std::string_view re,
                                           const std::vector<CaptureRef>& refs,
                                           const Binding& binding) {
  std::string out;
  std::size_t cursor = 0;
  for (const auto& r : refs) {
    out.append(re.substr(cursor, r.pos - cursor));
    auto it = binding.find(r.index);
    if (it == binding.end()) return std::nullopt;
    out += regex_escape(it->second.text);
    cursor = r.pos + r.len;
  }
  out.append(re.substr(cursor));
  return out;
}

std::string with_placeholders(std::string_view re, const std::vector<CaptureRef>& refs) {
  std::string out;
  std::size_t cursor = 0;
  for (const auto& r : refs) {
    out.append(re.substr(cursor, r.pos - cursor));
    out += "x";
    cursor = r.pos + r.len;
  }
  out.append(re.substr(cursor));
  return out;
}

// Searches, treating engine resource exhaustion as "no match".
bool search(std::string_view text, const boost::regex& rx,
            boost::match_results<std::string_view::const_iterator>& m) {
  try {
    return boost::regex_search(text.begin(), text.end(), m, rx);
  } catch (const std::runtime_error&) {
    return false;
  }
}

std::vector<std::size_t> template_refs(std::string_view tmpl) {
  std::vector<std::size_t> refs;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] != '$' || i + 1 >= tmpl.size()) continue;
    if (tmpl[i + 1] == '$') {
      ++i;
      continue;
    }
    std::size_t j = i + 1, value = 0;
    while (j < tmpl.size() && std::isdigit(static_cast<unsigned char>(tmpl[j]))) {
      value = value * 10 + static_cast<std::size_t>(tmpl[j] - '0');
      ++j;
    }
    if (j > i + 1) {
      refs.push_back(value);
      i = j - 1;
    }
  }
  return refs;
}

std::string interpolate_impl(std::string_view tmpl, const Binding& binding, bool strict) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    char c = tmpl[i];
    if (c != '$' || i + 1 >= tmpl.size()) {
      out.push_back(c);
      continue;
    }
    if (tmpl[i + 1] == '$') {
      out.push_back('$');
      ++i;
      continue;
    }
    std::size_t j = i + 1, value = 0;
    while (j < tmpl.size() && std::isdigit(static_cast<unsigned char>(tmpl[j]))) {
      value = value * 10 + static_cast<std::size_t>(tmpl[j] - '0');
      ++j;
    }
    if (j == i + 1) {
      out.push_back('$');
      continue;
    }
    auto it = binding.find(value);
    if (it != binding.end())
      out += it->second.text;
    else if (strict)
      throw ApplicationError("template refers to unbound capture $" + std::to_string(value));
    i = j - 1;
  }
  return out;
}

struct Selector {
  std::string kind;
  std::optional<std::string> regex;
};

std::optional<std::size_t> parse_capture_target(std::string_view target) {
  if (target.size() < 2 || target[0] != '$') return std::nullopt;
  std::size_t value = 0;
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(target[i]))) return std::nullopt;
    value = value * 10 + static_cast<std::size_t>(target[i] - '0');
  }
  return value;
}

std::optional<Selector> parse_selector(std::string_view target) {
  Selector sel;
  auto colon = target.find(':');
  auto kind = target.substr(0, colon);
  if (kind.empty()) return std::nullopt;
  for (char c : kind)
    if (!std::isalpha(static_cast<unsigned char>(c))) return std::nullopt;
  sel.kind.assign(kind);
  std::transform(sel.kind.begin(), sel.kind.end(), sel.kind.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (colon == std::string_view::npos) return sel;
  auto rest = target.substr(colon + 1);
  if (rest.size() < 2 || rest.front() != '/' || rest.back() != '/') return std::nullopt;
  sel.regex = std::string(rest.substr(1, rest.size() - 2));
  return sel;
}

// Offset lookup that also accepts the end of an instruction's span.
std::optional<std::size_t> owning_instruction(const dockerfile::DockerfileAst& ast,
                                              std::size_t offset) {
  for (std::size_t i = ast.instructions.size(); i-- > 0;) {
    const auto& s = ast.instructions[i].span;
    if (s.start <= offset && offset <= s.end) return i;
    if (s.end < offset) break;
  }
  return std::nullopt;
}

Binding::value_type make_capture(std::size_t index, std::string_view text, std::size_t pos,
                                 std::size_t len, Document doc) {
  return {index, Capture{std::string(text.substr(pos, len)), {pos, pos + len}, doc}};
}

void validate_script(const std::string& id, const Pattern& pattern, const EditScript& script) {
  for (const auto& op : script) {
    if (auto cap = parse_capture_target(op.target)) {
      if (*cap >= pattern.total_groups())
        throw ValidationError("rule '" + id + "': target " + op.target + " names no capture");
      if ((op.op == OpKind::Replace || op.op == OpKind::Remove) &&
          *cap >= pattern.static_groups())
        throw ValidationError("rule '" + id + "': " + std::string(to_string(op.op)) +
                              " target " + op.target + " is not a Dockerfile capture");
      if (op.op == OpKind::InsertAfter && *cap >= pattern.static_groups())
        throw ValidationError("rule '" + id + "': insert_after anchor " + op.target +
                              " is not a Dockerfile capture");
    } else if (auto sel = parse_selector(op.target)) {
      if (sel->regex) {
        auto refs = find_refs(*sel->regex);
        for (const auto& r : refs)
          if (r.index >= pattern.total_groups())
            throw ValidationError("rule '" + id + "': selector refers to missing ${" +
                                  std::to_string(r.index) + "}");
        try {
          compile_regex(with_placeholders(*sel->regex, refs));
        } catch (const boost::regex_error& e) {
          throw ValidationError("rule '" + id + "': invalid selector regex: " + e.what());
        }
      }
    } else {
      throw ValidationError("rule '" + id + "': bad target '" + op.target + "'");
    }
    for (auto ref : template_refs(op.text))
      if (ref >= pattern.total_groups())
        throw ValidationError("rule '" + id + "': text refers to missing $" +
                              std::to_string(ref));
  }
}

std::optional<std::string> optional_string(const json& obj, const char* key,
                                           const std::string& id) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  if (!obj[key].is_string())
    throw ValidationError("rule '" + id + "': field '" + key + "' must be a string");
  auto s = obj[key].get<std::string>();
  if (s.empty()) return std::nullopt;
  return s;
}

std::string entry_id(const json& obj) {
  if (!obj.is_object()) throw ValidationError("rule entry must be an object");
  if (!obj.contains("id") || !obj["id"].is_string() || obj["id"].get<std::string>().empty())
    throw ValidationError("rule entry without a string 'id'");
  return obj["id"].get<std::string>();
}

Pattern pattern_of(const json& obj, const std::string& id) {
  try {
    return Pattern::compile(optional_string(obj, "static_re", id),
                            optional_string(obj, "dynamic_re", id));
  } catch (const ValidationError& e) {
    throw ValidationError("rule '" + id + "': " + e.what());
  }
}

std::optional<int> parent_of(const json& obj, const std::string& id) {
  if (!obj.contains("parent_cluster") || obj["parent_cluster"].is_null()) return std::nullopt;
  if (!obj["parent_cluster"].is_number_integer())
    throw ValidationError("rule '" + id + "': parent_cluster must be an integer");
  return obj["parent_cluster"].get<int>();
}

OpKind op_kind(const std::string& name, const std::string& id) {
  if (name == "replace") return OpKind::Replace;
  if (name == "insert_after") return OpKind::InsertAfter;
  if (name == "remove") return OpKind::Remove;
  throw ValidationError("rule '" + id + "': unknown op '" + name + "'");
}

RepairRule repair_of(const json& obj) {
  RepairRule rule;
  rule.id = entry_id(obj);
  rule.pattern = pattern_of(obj, rule.id);
  if (!obj.contains("solutions") || !obj["solutions"].is_array() || obj["solutions"].empty())
    throw ValidationError("rule '" + rule.id + "': 'solutions' must be a non-empty array");
  for (const auto& sol : obj["solutions"]) {
    if (!sol.is_array())
      throw ValidationError("rule '" + rule.id + "': each solution must be an array of ops");
    EditScript script;
    for (const auto& o : sol) {
      if (!o.is_object() || !o.contains("op") || !o["op"].is_string() ||
          !o.contains("target") || !o["target"].is_string())
        throw ValidationError("rule '" + rule.id + "': op needs string 'op' and 'target'");
      EditOp op;
      op.op = op_kind(o["op"].get<std::string>(), rule.id);
      op.target = o["target"].get<std::string>();
      if (o.contains("text")) {
        if (!o["text"].is_string())
          throw ValidationError("rule '" + rule.id + "': op 'text' must be a string");
        op.text = o["text"].get<std::string>();
      }
      script.push_back(std::move(op));
    }
    validate_script(rule.id, rule.pattern, script);
    rule.solutions.push_back(std::move(script));
  }
  if (auto src = optional_string(obj, "src", rule.id)) rule.source_url = *src;
  if (auto notes = optional_string(obj, "notes", rule.id)) rule.notes = *notes;
  rule.parent_cluster = parent_of(obj, rule.id);
  if (obj.contains("fixtures") && obj["fixtures"].is_array()) {
    for (const auto& f : obj["fixtures"]) {
      if (!f.is_object() || !f.contains("dockerfile") || !f["dockerfile"].is_string() ||
          !f.contains("log") || !f["log"].is_string())
        throw ValidationError("rule '" + rule.id + "': fixture needs 'dockerfile' and 'log'");
      rule.fixtures.push_back({f["dockerfile"].get<std::string>(), f["log"].get<std::string>()});
    }
  }
  for (std::size_t i = 0; i < rule.fixtures.size(); ++i) {
    const auto& fx = rule.fixtures[i];
    auto binding = rule.pattern.match(fx.dockerfile, logpipe::normalize(fx.log));
    if (!binding)
      throw ValidationError("rule '" + rule.id + "': fixture " + std::to_string(i) +
                            " does not match the pattern");
    for (std::size_t s = 0; s < rule.solutions.size(); ++s) {
      try {
        apply_solution(fx.dockerfile, rule.solutions[s], *binding);
      } catch (const ApplicationError& e) {
        throw ValidationError("rule '" + rule.id + "': solution " + std::to_string(s) +
                              " does not apply to fixture " + std::to_string(i) + ": " +
                              e.what());
      }
    }
  }
  return rule;
}

Suggestion suggestion_of(const json& obj) {
  Suggestion s;
  s.id = entry_id(obj);
  s.pattern = pattern_of(obj, s.id);
  auto message = optional_string(obj, "message", s.id);
  if (!message) throw ValidationError("suggestion '" + s.id + "': 'message' is required");
  s.message = *message;
  for (auto ref : template_refs(s.message))
    if (ref >= s.pattern.total_groups())
      throw ValidationError("suggestion '" + s.id + "': message refers to missing $" +
                            std::to_string(ref));
  if (auto kind = optional_string(obj, "kind", s.id)) {
    s.kind = *kind;
    std::transform(s.kind.begin(), s.kind.end(), s.kind.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  }
  s.parent_cluster = parent_of(obj, s.id);
  return s;
}

json repair_json(const RepairRule& r) {
  json sols = json::array();
  for (const auto& script : r.solutions) {
    json ops = json::array();
    for (const auto& op : script) {
      json o = {{"op", std::string(to_string(op.op))}, {"target", op.target}};
      if (op.op != OpKind::Remove || !op.text.empty()) o["text"] = op.text;
      ops.push_back(std::move(o));
    }
    sols.push_back(std::move(ops));
  }
  json obj = {{"id", r.id},
              {"static_re", r.pattern.static_re() ? json(*r.pattern.static_re()) : json()},
              {"dynamic_re", r.pattern.dynamic_re() ? json(*r.pattern.dynamic_re()) : json()},
              {"solutions", std::move(sols)},
              {"src", r.source_url},
              {"notes", r.notes}};
  if (r.parent_cluster) obj["parent_cluster"] = *r.parent_cluster;
  if (!r.fixtures.empty()) {
    json fx = json::array();
    for (const auto& f : r.fixtures) fx.push_back({{"dockerfile", f.dockerfile}, {"log", f.log}});
    obj["fixtures"] = std::move(fx);
  }
  return obj;
}

json suggestion_json(const Suggestion& s) {
  json obj = {{"id", s.id},
              {"static_re", s.pattern.static_re() ? json(*s.pattern.static_re()) : json()},
              {"dynamic_re", s.pattern.dynamic_re() ? json(*s.pattern.dynamic_re()) : json()},
              {"message", s.message}};
  if (!s.kind.empty()) obj["kind"] = s.kind;
  if (s.parent_cluster) obj["parent_cluster"] = *s.parent_cluster;
  return obj;
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string(what) + " is not valid JSON: " + e.what());
  }
}

}  // namespace

struct Pattern::Compiled {
  std::optional<boost::regex> static_rx;
  std::optional<boost::regex> dynamic_rx;  // set when there are no ${N} refs
  std::vector<CaptureRef> dynamic_refs;
};

Pattern Pattern::compile(std::optional<std::string> static_re,
                         std::optional<std::string> dynamic_re) {
  if (!static_re && !dynamic_re)
    throw ValidationError("pattern needs a static_re or a dynamic_re");
  Pattern p;
  auto compiled = std::make_shared<Compiled>();
  if (static_re) {
    try {
      compiled->static_rx = compile_regex(*static_re);
    } catch (const boost::regex_error& e) {
      throw ValidationError(std::string("invalid static_re: ") + e.what());
    }
    p.static_groups_ = compiled->static_rx->mark_count();
  }
  if (dynamic_re) {
    compiled->dynamic_refs = find_refs(*dynamic_re);
    for (const auto& r : compiled->dynamic_refs)
      if (r.index >= p.static_groups_)
        throw ValidationError("dynamic_re refers to ${" + std::to_string(r.index) +
                              "} but the static side has " +
                              std::to_string(p.static_groups_) + " groups");
    try {
      auto rx = compile_regex(with_placeholders(*dynamic_re, compiled->dynamic_refs));
      p.dynamic_groups_ = rx.mark_count();
      if (compiled->dynamic_refs.empty()) compiled->dynamic_rx = std::move(rx);
    } catch (const boost::regex_error& e) {
      throw ValidationError(std::string("invalid dynamic_re: ") + e.what());
    }
  }
  p.static_re_ = std::move(static_re);
  p.dynamic_re_ = std::move(dynamic_re);
  p.compiled_ = std::move(compiled);
  return p;
}

std::optional<Binding> Pattern::match(std::string_view dockerfile_text,
                                      std::string_view log_text) const {
  if (!compiled_) return std::nullopt;
  Binding binding;
  boost::match_results<std::string_view::const_iterator> m;
  if (compiled_->static_rx) {
    if (!search(dockerfile_text, *compiled_->static_rx, m)) return std::nullopt;
    for (std::size_t g = 1; g < m.size(); ++g) {
      if (!m[g].matched) continue;
      binding.insert(make_capture(g - 1, dockerfile_text, static_cast<std::size_t>(m.position(g)),
                                  static_cast<std::size_t>(m.length(g)), Document::Static));
    }
  }
  if (dynamic_re_) {
    std::optional<boost::regex> local;
    const boost::regex* rx = compiled_->dynamic_rx ? &*compiled_->dynamic_rx : nullptr;
    if (!rx) {
      auto source = substitute_refs(*dynamic_re_, compiled_->dynamic_refs, binding);
      if (!source) return std::nullopt;
      try {
        local = compile_regex(*source);
      } catch (const boost::regex_error&) {
        return std::nullopt;
      }
      rx = &*local;
    }
    if (!search(log_text, *rx, m)) return std::nullopt;
    for (std::size_t g = 1; g < m.size(); ++g) {
      if (!m[g].matched) continue;
      binding.insert(make_capture(static_groups_ + g - 1, log_text,
                                  static_cast<std::size_t>(m.position(g)),
                                  static_cast<std::size_t>(m.length(g)), Document::Dynamic));
    }
  }
  return binding;
}

std::optional<SourceSpan> Pattern::static_match_span(std::string_view dockerfile_text) const {
  if (!compiled_ || !compiled_->static_rx) return std::nullopt;
  boost::match_results<std::string_view::const_iterator> m;
  if (!search(dockerfile_text, *compiled_->static_rx, m)) return std::nullopt;
  auto pos = static_cast<std::size_t>(m.position(std::size_t{0}));
  return SourceSpan{pos, pos + static_cast<std::size_t>(m.length(std::size_t{0}))};
}

std::string_view to_string(OpKind op) {
  switch (op) {
    case OpKind::Replace: return "replace";
    case OpKind::InsertAfter: return "insert_after";
    case OpKind::Remove: return "remove";
  }
  return "replace";
}

std::string_view to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::Repaired: return "repaired";
    case OutcomeKind::Suggested: return "suggested";
    case OutcomeKind::SearchFallback: return "search_fallback";
  }
  return "search_fallback";
}

const RepairRule* RuleDb::find_repair(std::string_view id) const {
  for (const auto& r : repairs)
    if (r.id == id) return &r;
  return nullptr;
}

const Suggestion* RuleDb::find_suggestion(std::string_view id) const {
  for (const auto& s : suggestions)
    if (s.id == id) return &s;
  return nullptr;
}

RuleDb rules_from_json(std::string_view text) {
  RuleDb db;
  bool blank = std::all_of(text.begin(), text.end(),
                           [](unsigned char c) { return std::isspace(c) != 0; });
  if (blank) return db;
  auto doc = parse_json(text, "rule file");
  if (!doc.is_object()) throw ValidationError("rule file must hold an object");
  if (doc.contains("version")) {
    if (!doc["version"].is_number_unsigned() && !doc["version"].is_number_integer())
      throw ValidationError("rule file 'version' must be an integer");
    db.version = doc["version"].get<std::uint64_t>();
  }
  std::set<std::string> ids;
  auto claim = [&](const std::string& id) {
    if (!ids.insert(id).second) throw ValidationError("duplicate rule id '" + id + "'");
  };
  if (doc.contains("repairs")) {
    if (!doc["repairs"].is_array()) throw ValidationError("'repairs' must be an array");
    for (const auto& entry : doc["repairs"]) {
      auto rule = repair_of(entry);
      claim(rule.id);
      db.repairs.push_back(std::move(rule));
    }
  }
  if (doc.contains("suggestions")) {
    if (!doc["suggestions"].is_array()) throw ValidationError("'suggestions' must be an array");
    for (const auto& entry : doc["suggestions"]) {
      auto s = suggestion_of(entry);
      claim(s.id);
      db.suggestions.push_back(std::move(s));
    }
  }
  return db;
}

std::string rules_to_json(const RuleDb& db) {
  json repairs = json::array();
  for (const auto& r : db.repairs) repairs.push_back(repair_json(r));
  json suggestions = json::array();
  for (const auto& s : db.suggestions) suggestions.push_back(suggestion_json(s));
  json doc = {{"version", db.version}, {"repairs", repairs}, {"suggestions", suggestions}};
  return doc.dump(2) + "\n";
}

RuleDb load_rules(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read rule file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return rules_from_json(buf.str());
}

std::uint64_t save_rules(const RuleDb& db, const std::filesystem::path& path) {
  RuleDb next = db;
  next.version = db.version + 1;
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << rules_to_json(next);
    if (!out) throw IoError("error while writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
  return next.version;
}

RepairRule repair_from_json(std::string_view text) {
  return repair_of(parse_json(text, "repair rule"));
}

Suggestion suggestion_from_json(std::string_view text) {
  return suggestion_of(parse_json(text, "suggestion"));
}

std::string repair_to_json(const RepairRule& rule) { return repair_json(rule).dump(); }
std::string suggestion_to_json(const Suggestion& s) { return suggestion_json(s).dump(); }

std::string interpolate(std::string_view tmpl, const Binding& binding) {
  return interpolate_impl(tmpl, binding, true);
}

std::string apply_solution(std::string_view text, const EditScript& script,
                           const Binding& binding) {
  auto ast = dockerfile::parse(text);
  std::vector<dockerfile::Edit> edits;
  for (const auto& op : script) {
    auto replacement = op.op == OpKind::Remove ? std::string() : interpolate(op.text, binding);
    if (auto cap = parse_capture_target(op.target)) {
      auto it = binding.find(*cap);
      if (it == binding.end())
        throw ApplicationError("binding " + op.target + " is missing");
      if (it->second.document != Document::Static)
        throw ApplicationError("target " + op.target + " is not in the Dockerfile");
      const auto& span = it->second.span;
      if (op.op == OpKind::InsertAfter) {
        auto idx = owning_instruction(ast, span.start);
        if (!idx) throw ApplicationError("no instruction holds " + op.target);
        auto end = ast.instructions[*idx].span.end;
        edits.push_back({{end, end}, std::move(replacement)});
      } else {
        edits.push_back({span, std::move(replacement)});
      }
      continue;
    }
    auto sel = parse_selector(op.target);
    if (!sel) throw ApplicationError("bad target '" + op.target + "'");
    std::optional<boost::regex> rx;
    if (sel->regex) {
      auto source = substitute_refs(*sel->regex, find_refs(*sel->regex), binding);
      if (!source) throw ApplicationError("selector '" + op.target + "' needs a missing capture");
      try {
        rx = compile_regex(*source);
      } catch (const boost::regex_error& e) {
        throw ApplicationError(std::string("selector regex: ") + e.what());
      }
    }
    bool resolved = false;
    for (const auto& ins : ast.instructions) {
      if (ins.kind != sel->kind) continue;
      auto body = ast.text(ins);
      dockerfile::SourceSpan span = ins.span;
      if (rx) {
        boost::match_results<std::string_view::const_iterator> m;
        if (!search(body, *rx, m)) continue;
        auto pos = ins.span.start + static_cast<std::size_t>(m.position(std::size_t{0}));
        span = {pos, pos + static_cast<std::size_t>(m.length(std::size_t{0}))};
      }
      if (op.op == OpKind::InsertAfter)
        edits.push_back({{ins.span.end, ins.span.end}, std::move(replacement)});
      else
        edits.push_back({span, std::move(replacement)});
      resolved = true;
      break;
    }
    if (!resolved) throw ApplicationError("selector '" + op.target + "' matched no instruction");
  }
  try {
    return dockerfile::splice(text, edits);
  } catch (const ValidationError& e) {
    throw ApplicationError(e.what());
  }
}

RepairOutcome diagnose(std::string_view dockerfile_text, std::string_view raw_log,
                       const RuleDb& db) {
  RepairOutcome out;
  auto log = logpipe::normalize(raw_log);
  for (const auto& rule : db.repairs) {
    auto binding = rule.pattern.match(dockerfile_text, log);
    if (!binding) continue;
    std::vector<Variant> variants;
    std::vector<std::string> failed;
    for (std::size_t s = 0; s < rule.solutions.size(); ++s) {
      try {
        variants.push_back({rule.id, s, apply_solution(dockerfile_text, rule.solutions[s], *binding)});
      } catch (const ApplicationError& e) {
        failed.push_back("solution " + std::to_string(s) + ": " + e.what());
      }
    }
    if (variants.empty()) continue;
    out.kind = OutcomeKind::Repaired;
    out.rule_id = rule.id;
    out.variants = std::move(variants);
    out.failed_solutions = std::move(failed);
    return out;
  }
  for (const auto& s : db.suggestions) {
    auto binding = s.pattern.match(dockerfile_text, log);
    if (!binding) continue;
    auto message = interpolate_impl(s.message, *binding, false);
    if (message.empty()) continue;
    out.kind = OutcomeKind::Suggested;
    out.suggestion_id = s.id;
    out.message = std::move(message);
    out.suggestion_span = s.pattern.static_match_span(dockerfile_text);
    return out;
  }
  out.kind = OutcomeKind::SearchFallback;
  out.keywords = search::extract_keywords(raw_log);
  if (!out.keywords.empty())
    out.query_string = search::SearchQuery::from_keywords(out.keywords).query_string;
  return out;
}

RepairOutcome repair(const BuildRecord& record, const RuleDb& db,
                     const search::SearchClient* client) {
  if (record.outcome != BuildOutcome::Failure)
    throw ValidationError("record '" + record.record_id + "' is not a failed build (outcome " +
                          std::string(to_string(record.outcome)) + ")");
  std::string raw = record.stdout_log;
  if (!raw.empty() && !record.stderr_log.empty()) raw.push_back('\n');
  raw += record.stderr_log;
  auto out = diagnose(record.dockerfile_text, raw, db);
  if (out.kind != OutcomeKind::SearchFallback) return out;

  auto tail = logpipe::tail_error_log(record.stderr_log, record.stdout_log);
  out.keywords = search::extract_keywords(tail.text);
  out.query_string.clear();
  if (out.keywords.empty()) return out;
  auto query = search::SearchQuery::from_keywords(out.keywords);
  out.query_string = query.query_string;
  if (!client) return out;
  try {
    out.results = client->top5(query);
  } catch (const std::exception& e) {
    out.search_error = e.what();
  }
  return out;
}

DryRunReport dry_run(const Pattern& pattern, std::span<const BuildRecord> records) {
  DryRunReport report;
  for (const auto& r : records) {
    if (r.outcome != BuildOutcome::Failure) continue;
    ++report.considered;
    if (pattern.match(r.dockerfile_text, logpipe::rule_log_text(r)))
      report.matched_ids.push_back(r.record_id);
  }
  if (report.considered > 0)
    report.fraction =
        static_cast<double>(report.matched_ids.size()) / static_cast<double>(report.considered);
  return report;
}

RuleDb builtin_rules() { return rules_from_json(builtin_rules_json()); }

}  // namespace dockwright::rules
