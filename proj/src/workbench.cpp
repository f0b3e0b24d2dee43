// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include "dockwright/workbench.hpp"

#include <httplib.h>
#include <json.hpp>

#include <filesystem>

#include "dockwright/diff.hpp"
#include "dockwright/errors.hpp"
#include "dockwright/logpipe.hpp"
#include "json_views.hpp"

namespace dockwright::workbench {

using nlohmann::json;

namespace {

Reply ok(const json& body, int status = 200) { return {status, body.dump()}; }

Reply fail(int status, const std::string& kind, const std::string& message) {
  return {status, json{{"error", message}, {"kind", kind}}.dump()};
}

json record_json(const BuildRecord& r) { return json::parse(format_record_line(r)); }


std::string label_of_path(const BuildRecord& r) {
  return r.dockerfile_path.empty() ? std::string("Dockerfile") : r.dockerfile_path;
}

std::optional<int> parse_cluster_id(const std::string& s) {
  if (s.empty() || s.size() > 9 || s.find_first_not_of("0123456789") != std::string::npos)
    return std::nullopt;
  return std::stoi(s);
}

}  // namespace

Workbench::Workbench(Config cfg, std::vector<BuildRecord> records, rules::RuleDb db,
                     pipeline::ClusteringArtifact clusters)
    : cfg_(std::move(cfg)),
      records_(std::make_shared<const std::vector<BuildRecord>>(std::move(records))),
      rules_(std::make_shared<const rules::RuleDb>(std::move(db))),
      clusters_(std::make_shared<const pipeline::ClusteringArtifact>(std::move(clusters))) {
  for (std::size_t i = 0; i < records_->size(); ++i) record_index_[(*records_)[i].record_id] = i;
  if (!cfg_.search.url.empty()) {
    auto allow = cfg_.search.allowlist.empty() ? search::default_allowlist() : cfg_.search.allowlist;
    search_ = std::make_unique<search::SearchClient>(cfg_.search.url, allow, cfg_.search.timeout_s);
  }
}

Workbench::~Workbench() {
  stop();
  wait_for_recompute();
}

std::unique_ptr<Workbench> Workbench::open(const Config& cfg) {
  if (cfg.corpus.empty()) throw ConfigError("no corpus configured");
  auto ingest = ingest_corpus(cfg.corpus);
  rules::RuleDb db;
  std::error_code ec;
  if (!cfg.rules.empty() && std::filesystem::exists(cfg.rules, ec))
    db = rules::load_rules(cfg.rules);
  else
    db = rules::builtin_rules();
  pipeline::ClusteringArtifact art;
  if (!cfg.clusters.empty() && std::filesystem::exists(cfg.clusters, ec)) {
    art = pipeline::load_artifact(cfg.clusters);
  } else {
    auto grid = cfg.grid.empty() ? cluster::default_grid() : cfg.grid;
    art = pipeline::cluster_corpus(ingest.records, cfg.embedder, grid, cfg.tail_lines);
    if (!cfg.clusters.empty()) pipeline::save_artifact(art, cfg.clusters);
  }
  return std::make_unique<Workbench>(cfg, std::move(ingest.records), std::move(db),
                                     std::move(art));
}

std::shared_ptr<const rules::RuleDb> Workbench::rules_snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return rules_;
}

std::shared_ptr<const pipeline::ClusteringArtifact> Workbench::clusters_snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return clusters_;
}

std::uint64_t Workbench::rules_version() const { return rules_snapshot()->version; }

Reply Workbench::get_clusters() const {
  auto art = clusters_snapshot();
  const auto& a = art->assignment;
  json clusters = json::array();
  for (std::size_t c = 0; c < a.cluster_count(); ++c) {
    std::vector<const BuildRecord*> members;
    for (auto i : a.members(static_cast<int>(c))) {
      auto it = record_index_.find(art->record_ids[i]);
      if (it != record_index_.end()) members.push_back(&(*records_)[it->second]);
    }
    clusters.push_back({{"cluster_id", c},
                        {"size", a.members(static_cast<int>(c)).size()},
                        {"stability", a.stabilities[c]},
                        {"top_terms", pipeline::top_terms(members, art->tail_lines)}});
  }
  return ok({{"stale", stale_.load()},
             {"clusters", clusters},
             {"noise_count", a.noise_count()},
             {"clustered_records", art->record_ids.size()},
             {"params",
              {{"min_cluster_size", a.params.min_cluster_size},
               {"min_samples", a.params.min_samples}}}});
}

Reply Workbench::get_cluster(const std::string& id) const {
  auto art = clusters_snapshot();
  auto cid = parse_cluster_id(id);
  if (!cid || *cid >= static_cast<int>(art->assignment.cluster_count()))
    return fail(404, "not_found", "no cluster '" + id + "'");
  json members = json::array();
  std::vector<const BuildRecord*> recs;
  for (auto i : art->assignment.members(*cid)) {
    const auto& rid = art->record_ids[i];
    json m = {{"record_id", rid}};
    if (auto it = record_index_.find(rid); it != record_index_.end()) {
      const auto& r = (*records_)[it->second];
      recs.push_back(&r);
      m["log_tail"] = logpipe::tail_error_log(r.stderr_log, r.stdout_log, art->tail_lines).text;
      m["dockerfile_path"] = r.dockerfile_path;
    }
    members.push_back(std::move(m));
  }
  return ok({{"cluster_id", *cid},
             {"stale", stale_.load()},
             {"size", members.size()},
             {"stability", art->assignment.stabilities[static_cast<std::size_t>(*cid)]},
             {"top_terms", pipeline::top_terms(recs, art->tail_lines)},
             {"members", members}});
}

Reply Workbench::get_record(const std::string& id) const {
  auto it = record_index_.find(id);
  if (it == record_index_.end()) return fail(404, "not_found", "no record '" + id + "'");
  const auto& r = (*records_)[it->second];
  auto body = record_json(r);
  auto art = clusters_snapshot();
  int label = -1;
  for (std::size_t i = 0; i < art->record_ids.size(); ++i)
    if (art->record_ids[i] == id) label = art->assignment.labels[i];
  body["cluster_id"] = label;
  body["log_tail"] = logpipe::tail_error_log(r.stderr_log, r.stdout_log, cfg_.tail_lines).text;
  return ok(body);
}

Reply Workbench::get_rules() const {
  return {200, rules::rules_to_json(*rules_snapshot())};
}

Reply Workbench::post_dry_run(const std::string& body) const {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::parse_error& e) {
    return fail(400, "validation", std::string("body is not valid JSON: ") + e.what());
  }
  if (!req.is_object() || !req.contains("rule") || !req["rule"].is_object())
    return fail(400, "validation", "body needs a 'rule' object");
  const auto& rule = req["rule"];
  std::string kind = req.value("kind", std::string());
  if (kind.empty()) kind = rule.contains("solutions") ? "repair" : "suggestion";
  if (kind != "repair" && kind != "suggestion")
    return fail(400, "validation", "kind must be \"repair\" or \"suggestion\"");

  std::optional<rules::RepairRule> repair;
  std::optional<rules::Suggestion> suggestion;
  try {
    if (kind == "repair")
      repair = rules::repair_from_json(rule.dump());
    else
      suggestion = rules::suggestion_from_json(rule.dump());
  } catch (const ValidationError& e) {
    return fail(400, "validation", e.what());
  }
  const auto& pattern = repair ? repair->pattern : suggestion->pattern;

  auto version = rules_version();
  std::vector<BuildRecord> scope;
  json cluster_field = nullptr;
  if (req.contains("cluster_id") && !req["cluster_id"].is_null()) {
    if (!req["cluster_id"].is_number_integer())
      return fail(400, "validation", "cluster_id must be an integer");
    int cid = req["cluster_id"].get<int>();
    auto art = clusters_snapshot();
    if (cid < 0 || cid >= static_cast<int>(art->assignment.cluster_count()))
      return fail(404, "not_found", "no cluster " + std::to_string(cid));
    for (auto i : art->assignment.members(cid))
      if (auto it = record_index_.find(art->record_ids[i]); it != record_index_.end())
        scope.push_back((*records_)[it->second]);
    cluster_field = cid;
  } else {
    scope = *records_;
  }
  auto report = rules::dry_run(pattern, scope);
  json out = {{"matched_ids", report.matched_ids},
              {"considered", report.considered},
              {"fraction", report.fraction ? json(*report.fraction) : json()},
              {"cluster_id", cluster_field},
              {"rules_version", version}};

  if (repair && req.contains("record_id") && req["record_id"].is_string()) {
    auto rid = req["record_id"].get<std::string>();
    auto it = record_index_.find(rid);
    if (it == record_index_.end()) return fail(404, "not_found", "no record '" + rid + "'");
    const auto& r = (*records_)[it->second];
    json preview = {{"record_id", rid}, {"matched", false}, {"variants", json::array()}};
    if (auto binding = pattern.match(r.dockerfile_text, logpipe::rule_log_text(r))) {
      preview["matched"] = true;
      for (std::size_t s = 0; s < repair->solutions.size(); ++s) {
        try {
          auto text = rules::apply_solution(r.dockerfile_text, repair->solutions[s], *binding);
          preview["variants"].push_back(
              {{"solution_index", s},
               {"diff", diff::unified_diff(r.dockerfile_text, text, "a/" + label_of_path(r),
                                           "b/" + label_of_path(r))}});
        } catch (const ApplicationError& e) {
          preview["variants"].push_back({{"solution_index", s}, {"error", e.what()}});
        }
      }
    }
    out["preview"] = std::move(preview);
  }
  return ok(out);
}

Reply Workbench::post_rules(const std::string& body) {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::parse_error& e) {
    return fail(400, "validation", std::string("body is not valid JSON: ") + e.what());
  }
  bool has_repair = req.is_object() && req.contains("repair") && req["repair"].is_object();
  bool has_suggestion =
      req.is_object() && req.contains("suggestion") && req["suggestion"].is_object();
  if (has_repair == has_suggestion)
    return fail(400, "validation", "body needs exactly one of 'repair' or 'suggestion'");
  bool replace = req.value("replace", false);

  std::lock_guard writer(writer_mu_);
  auto next = std::make_shared<rules::RuleDb>(*rules_snapshot());
  std::string id;
  try {
    if (has_repair) {
      auto r = rules::repair_from_json(req["repair"].dump());
      id = r.id;
      if (next->find_suggestion(id)) return fail(409, "conflict", "id '" + id + "' is a suggestion");
      auto it = std::find_if(next->repairs.begin(), next->repairs.end(),
                             [&](const auto& x) { return x.id == id; });
      if (it != next->repairs.end() && !replace)
        return fail(409, "conflict", "rule '" + id + "' exists; pass \"replace\": true");
      if (it != next->repairs.end())
        *it = std::move(r);
      else
        next->repairs.push_back(std::move(r));
    } else {
      auto s = rules::suggestion_from_json(req["suggestion"].dump());
      id = s.id;
      if (next->find_repair(id)) return fail(409, "conflict", "id '" + id + "' is a repair");
      auto it = std::find_if(next->suggestions.begin(), next->suggestions.end(),
                             [&](const auto& x) { return x.id == id; });
      if (it != next->suggestions.end() && !replace)
        return fail(409, "conflict", "suggestion '" + id + "' exists; pass \"replace\": true");
      if (it != next->suggestions.end())
        *it = std::move(s);
      else
        next->suggestions.push_back(std::move(s));
    }
  } catch (const ValidationError& e) {
    return fail(400, "validation", e.what());
  }
  try {
    if (!cfg_.rules.empty())
      next->version = rules::save_rules(*next, cfg_.rules);
    else
      next->version += 1;
  } catch (const IoError& e) {
    return fail(500, "io", e.what());
  }
  {
    std::lock_guard lock(snapshot_mu_);
    rules_ = next;
  }
  return ok({{"id", id}, {"kind", has_repair ? "repair" : "suggestion"}, {"version", next->version}},
            201);
}

Reply Workbench::get_search(const std::string& record_id) const {
  auto it = record_index_.find(record_id);
  if (it == record_index_.end()) return fail(404, "not_found", "no record '" + record_id + "'");
  const auto& r = (*records_)[it->second];
  auto tail = logpipe::tail_error_log(r.stderr_log, r.stdout_log, cfg_.tail_lines);
  auto keywords = search::extract_keywords(tail.text, cfg_.search.max_keywords);
  json out = {{"record_id", record_id}, {"keywords", keywords}, {"results", json::array()}};
  if (keywords.empty()) {
    out["query"] = "";
    return ok(out);
  }
  auto query = search::SearchQuery::from_keywords(keywords);
  out["query"] = query.query_string;
  if (!search_) return fail(503, "config", "no search backend configured");
  try {
    for (const auto& s : search_->top5(query)) out["results"].push_back(detail::result_json(s));
  } catch (const TransportError& e) {
    return fail(502, "transport", e.what());
  } catch (const ProtocolError& e) {
    return fail(502, "protocol", e.what());
  }
  return ok(out);
}

Reply Workbench::post_repair(const std::string& record_id, const std::string& body) const {
  auto it = record_index_.find(record_id);
  if (it == record_index_.end()) return fail(404, "not_found", "no record '" + record_id + "'");
  bool use_search = true;
  if (!body.empty()) {
    try {
      auto req = json::parse(body);
      if (req.is_object()) use_search = req.value("search", true);
    } catch (const json::parse_error& e) {
      return fail(400, "validation", std::string("body is not valid JSON: ") + e.what());
    }
  }
  const auto& r = (*records_)[it->second];
  auto db = rules_snapshot();
  rules::RepairOutcome outcome;
  try {
    outcome = rules::repair(r, *db, use_search ? search_.get() : nullptr);
  } catch (const ValidationError& e) {
    return fail(400, "validation", e.what());
  }
  auto out = detail::outcome_json(r.dockerfile_text, r.dockerfile_path, outcome);
  out["record_id"] = record_id;
  out["rules_version"] = db->version;
  return ok(out);
}

Reply Workbench::post_recompute() {
  std::lock_guard lock(job_mu_);
  if (stale_.load()) return ok({{"status", "running"}}, 202);
  if (job_.joinable()) job_.join();
  stale_ = true;
  job_ = std::thread([this] {
    try {
      auto grid = cfg_.grid.empty() ? cluster::default_grid() : cfg_.grid;
      auto art = std::make_shared<pipeline::ClusteringArtifact>(
          pipeline::cluster_corpus(*records_, cfg_.embedder, grid, cfg_.tail_lines));
      if (!cfg_.clusters.empty()) pipeline::save_artifact(*art, cfg_.clusters);
      std::lock_guard snap(snapshot_mu_);
      clusters_ = std::move(art);
    } catch (const std::exception&) {
      // Keep serving the previous clustering.
    }
    stale_ = false;
  });
  return ok({{"status", "started"}}, 202);
}

void Workbench::wait_for_recompute() {
  std::lock_guard lock(job_mu_);
  if (job_.joinable()) job_.join();
}

void Workbench::install_routes() {
  auto& s = *server_;
  auto send = [](httplib::Response& res, const Reply& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  s.Get("/clusters", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, get_clusters());
  });
  s.Get("/clusters/:id", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_cluster(req.path_params.at("id")));
  });
  s.Post("/clusters/recompute", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, post_recompute());
  });
  s.Get("/records/:id", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_record(req.path_params.at("id")));
  });
  s.Get("/rules", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, get_rules());
  });
  s.Post("/rules/dry-run", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, post_dry_run(req.body));
  });
  s.Post("/rules", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, post_rules(req.body));
  });
  s.Get("/search", [this, send](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("record"))
      return send(res, fail(400, "validation", "missing 'record' query parameter"));
    send(res, get_search(req.get_param_value("record")));
  });
  s.Post("/repair/:id", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, post_repair(req.path_params.at("id"), req.body));
  });
  s.set_exception_handler([send](const httplib::Request&, httplib::Response& res,
                                 std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send(res, fail(500, "internal", e.what()));
    } catch (...) {
      send(res, fail(500, "internal", "unknown error"));
    }
  });
  s.set_error_handler([send](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) send(res, fail(res.status, "not_found", "no such endpoint"));
  });
}

std::uint16_t Workbench::start(const std::string& host, std::uint16_t port) {
  server_ = std::make_unique<httplib::Server>();
  // httplib defaults to SO_REUSEPORT, which lets a second instance share a
  // busy port silently.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  install_routes();
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound <= 0)
    throw TransportError("cannot bind " + host + ":" + std::to_string(port));
  bound_port_ = static_cast<std::uint16_t>(bound);
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound_port_;
}

void Workbench::serve(const std::string& host, std::uint16_t port) {
  start(host, port);
  if (server_thread_.joinable()) server_thread_.join();
}

void Workbench::stop() {
  if (server_) server_->stop();
  if (server_thread_.joinable() && server_thread_.get_id() != std::this_thread::get_id())
    server_thread_.join();
}

}  // namespace dockwright::workbench
