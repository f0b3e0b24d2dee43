// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

// Command-line front end. Talks to the library only through dockwright.h.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "dockwright/dockwright.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitEnvironment = 2;

int exit_code(dw_status s) {
  switch (s) {
    case DW_OK: return kExitOk;
    case DW_ERR_VALIDATION:
    case DW_ERR_APPLICATION:
    case DW_ERR_NOT_FOUND: return kExitValidation;
    default: return kExitEnvironment;
  }
}

struct Failure {
  dw_status status;
  std::string message;
};

void check(dw_status s) {
  if (s != DW_OK) throw Failure{s, dw_last_error()};
}

struct Text {
  char* p = nullptr;
  ~Text() { dw_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  ~Handle() {
    if (p) Free(p);
  }
};
using Config = Handle<dw_config, dw_config_free>;
using Corpus = Handle<dw_corpus, dw_corpus_free>;
using Rules = Handle<dw_rules, dw_rules_free>;
using Clustering = Handle<dw_clustering, dw_clustering_free>;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Failure{DW_ERR_IO, "cannot read " + p.string()};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw Failure{DW_ERR_IO, "cannot write " + p.string()};
}

struct Options {
  std::string config;
  std::string corpus, rules, clusters, record, out, out_dir, grid, search_url;
  std::string dockerfile, log, jobs, engine, host, rejects, format = "text";
  std::size_t tail = 0, parallelism = 0;
  int port = -1;
  double timeout = 0;
  bool strict = false, coverage = false, proportions = false, breakage = false;
};

void load_config(const Options& o, Config& cfg) {
  check(dw_config_load(o.config.empty() ? nullptr : o.config.c_str(), &cfg.p));
  auto set = [&](const char* key, const std::string& v) {
    if (!v.empty()) check(dw_config_set(cfg.p, key, v.c_str()));
  };
  set("corpus", o.corpus);
  set("rules", o.rules);
  set("clusters", o.clusters);
  set("grid", o.grid);
  set("search_url", o.search_url);
  set("engine", o.engine);
  set("host", o.host);
  if (o.tail) set("tail_lines", std::to_string(o.tail));
  if (o.parallelism) set("parallelism", std::to_string(o.parallelism));
  if (o.port >= 0) set("port", std::to_string(o.port));
  if (o.timeout > 0) set("timeout_s", std::to_string(o.timeout));
}

void open_rules(const Options& o, Rules& rules) {
  if (o.rules.empty())
    check(dw_rules_builtin(&rules.p));
  else
    check(dw_rules_load(o.rules.c_str(), &rules.p));
}

fs::path default_clusters_path(const std::string& corpus) {
  fs::path p(corpus);
  return p.parent_path() / (p.stem().string() + ".clusters.json");
}

int cmd_ingest(const Options& o) {
  Corpus corpus;
  check(dw_corpus_open(o.corpus.c_str(), &corpus.p));
  Text rejects, stats;
  check(dw_corpus_rejects_json(corpus.p, &rejects.p));
  check(dw_corpus_stats_json(corpus.p, &stats.p));
  auto rj = json::parse(rejects.str());
  auto sj = json::parse(stats.str());
  std::cout << "records: " << dw_corpus_size(corpus.p) << "\n"
            << "rejected lines: " << rj.size() << "\n";
  for (const auto& r : rj)
    std::cout << "  line " << r["line"].get<std::size_t>() << ": "
              << r["reason"].get<std::string>() << "\n";
  std::printf("outcomes: %zu success, %zu failure, %zu timeout, %zu undetermined\n",
              sj["successes"].get<std::size_t>(), sj["failures"].get<std::size_t>(),
              sj["timeouts"].get<std::size_t>(), sj["undetermined"].get<std::size_t>());
  std::printf("breakage rate: %.4f\n", sj["breakage_rate"].get<double>());
  std::fflush(stdout);
  if (!o.out.empty()) check(dw_corpus_save(corpus.p, o.out.c_str()));
  if (!o.rejects.empty()) write_file(o.rejects, rj.dump(2) + "\n");
  return o.strict && !rj.empty() ? kExitValidation : kExitOk;
}


int cmd_build(const Options& o) {
  Config cfg;
  load_config(o, cfg);
  Text stats;
  check(dw_build_batch(o.jobs.c_str(), cfg.p, o.out.c_str(), &stats.p));
  auto sj = json::parse(stats.str());
  std::printf("built %zu: %zu success, %zu failure, %zu timeout, %zu undetermined\n",
              sj["total"].get<std::size_t>(), sj["successes"].get<std::size_t>(),
              sj["failures"].get<std::size_t>(), sj["timeouts"].get<std::size_t>(),
              sj["undetermined"].get<std::size_t>());
  std::printf("records appended to %s\n", o.out.c_str());
  return kExitOk;
}

int cmd_cluster(const Options& o) {
  Config cfg;
  load_config(o, cfg);
  Corpus corpus;
  check(dw_corpus_open(o.corpus.c_str(), &corpus.p));
  Clustering clustering;
  check(dw_cluster_corpus(corpus.p, cfg.p, &clustering.p));
  fs::path out = o.out.empty() ? default_clusters_path(o.corpus) : fs::path(o.out);
  check(dw_clustering_save(clustering.p, out.string().c_str()));
  Text text;
  check(dw_clustering_to_json(clustering.p, &text.p));
  auto art = json::parse(text.str());
  const auto& grid = art["grid"];
  std::printf("%-6s %-4s %-8s %-10s\n", "mcs", "k", "clusters", "clustered");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& g = grid[i];
    if (g["skipped"].get<bool>()) {
      std::printf("%-6zu %-4zu %-8s %-10s\n", g["min_cluster_size"].get<std::size_t>(),
                  g["min_samples"].get<std::size_t>(), "-", "skipped");
      continue;
    }
    std::printf("%-6zu %-4zu %-8zu %-10.4f%s\n", g["min_cluster_size"].get<std::size_t>(),
                g["min_samples"].get<std::size_t>(), g["cluster_count"].get<std::size_t>(),
                g["clustered_fraction"].get<double>(),
                i == art["best"].get<std::size_t>() ? "  <- best" : "");
  }
  std::size_t noise = 0;
  for (int l : art["labels"]) noise += l < 0;
  std::printf("failing records: %zu, clusters: %zu, noise: %zu\n", art["labels"].size(),
              art["stabilities"].size(), noise);
  std::printf("assignment written to %s\n", out.string().c_str());
  return kExitOk;
}

void print_outcome(const json& r) {
  auto kind = r["kind"].get<std::string>();
  if (kind == "repaired") {
    std::cout << "repaired by rule " << r["rule_id"].get<std::string>() << " ("
              << r["variants"].size() << " variant" << (r["variants"].size() == 1 ? "" : "s")
              << ")\n";
    for (const auto& f : r["failed_solutions"]) std::cerr << "skipped " << f.get<std::string>() << "\n";
  } else if (kind == "suggested") {
    std::cout << "suggestion " << r["suggestion"]["id"].get<std::string>() << ": "
              << r["suggestion"]["message"].get<std::string>() << "\n";
  } else {
    const auto& s = r["search"];
    std::cout << "no rule matched\n";
    std::cout << "query: " << s["query"].get<std::string>() << "\n";
    for (const auto& u : s["results"])
      std::cout << "  " << u["url"].get<std::string>() << "  " << u["title"].get<std::string>()
                << "\n";
    if (!s["error"].get<std::string>().empty())
      std::cerr << "search failed: " << s["error"].get<std::string>() << "\n";
  }
}

int cmd_repair(const Options& o) {
  Rules rules;
  open_rules(o, rules);
  Text result;
  fs::path stem;
  if (!o.dockerfile.empty()) {
    if (!o.record.empty() || !o.corpus.empty())
      throw Failure{DW_ERR_INVALID_ARGUMENT, "use either --dockerfile/--log or --corpus/--record"};
    if (o.log.empty()) throw Failure{DW_ERR_INVALID_ARGUMENT, "--dockerfile needs --log"};
    auto text = read_file(o.dockerfile);
    auto log = read_file(o.log);
    check(dw_diagnose(text.c_str(), log.c_str(), rules.p, &result.p));
    stem = o.dockerfile;
  } else {
    if (o.corpus.empty() || o.record.empty())
      throw Failure{DW_ERR_INVALID_ARGUMENT, "repair needs --corpus and --record, or --dockerfile and --log"};
    Config cfg;
    load_config(o, cfg);
    Corpus corpus;
    check(dw_corpus_open(o.corpus.c_str(), &corpus.p));
    check(dw_repair_record(corpus.p, o.record.c_str(), rules.p, cfg.p, &result.p));
    Text rec;
    check(dw_corpus_record_json(corpus.p, o.record.c_str(), &rec.p));
    auto path = json::parse(rec.str())["dockerfile_path"].get<std::string>();
    auto base = fs::path(path.empty() ? "Dockerfile" : path).filename().string();
    stem = fs::path(o.corpus).parent_path() / (o.record + "." + base);
  }
  if (!o.out_dir.empty()) stem = fs::path(o.out_dir) / stem.filename();
  auto r = json::parse(result.str());
  print_outcome(r);
  std::size_t n = 0;
  for (const auto& v : r["variants"]) {
    ++n;
    fs::path target = stem.string() + ".fix" + std::to_string(n);
    write_file(target, v["text"].get<std::string>());
    std::cerr << "wrote " << target.string() << "\n";
    std::cout << v["diff"].get<std::string>();
  }
  return kExitOk;
}

int cmd_search(const Options& o) {
  Config cfg;
  load_config(o, cfg);
  Corpus corpus;
  check(dw_corpus_open(o.corpus.c_str(), &corpus.p));
  Text result;
  check(dw_search_record(corpus.p, o.record.c_str(), cfg.p, &result.p));
  auto r = json::parse(result.str());
  std::cout << "query: " << r["query"].get<std::string>() << "\n";
  if (r["results"].empty()) std::cout << "no leads\n";
  for (const auto& u : r["results"])
    std::cout << u["url"].get<std::string>() << "  " << u["title"].get<std::string>() << "\n";
  return kExitOk;
}

int cmd_report(const Options& o) {
  int picked = o.coverage + o.proportions + o.breakage;
  if (picked != 1)
    throw Failure{DW_ERR_INVALID_ARGUMENT,
                  "report needs exactly one of --coverage, --proportions, --breakage"};
  const char* what = o.coverage ? "coverage" : o.proportions ? "proportions" : "breakage";
  Corpus corpus;
  check(dw_corpus_open(o.corpus.c_str(), &corpus.p));
  Rules rules;
  Clustering clustering;
  if (!o.breakage) {
    open_rules(o, rules);
    auto path = o.clusters.empty() ? default_clusters_path(o.corpus).string() : o.clusters;
    check(dw_clustering_load(path.c_str(), &clustering.p));
  }
  Text text;
  check(dw_report(corpus.p, clustering.p, rules.p, what, o.format.c_str(), &text.p));
  if (o.out.empty())
    std::cout << text.str();
  else
    write_file(o.out, text.str());
  return kExitOk;
}

int cmd_serve(const Options& o) {
  Config cfg;
  load_config(o, cfg);
  std::cerr << "serving on " << (o.host.empty() ? "127.0.0.1" : o.host) << ":"
            << (o.port >= 0 ? o.port : 7341) << "\n";
  check(dw_workbench_serve(cfg.p));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dockwright: classify, cluster and repair Dockerfile build failures"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dw_version()));
  Options o;
  app.add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);

  auto* ingest = app.add_subcommand("ingest", "validate a corpus and print its statistics");
  ingest->add_option("--corpus", o.corpus, "corpus file (JSON lines)")->required();
  ingest->add_option("--out", o.out, "write the well-formed records here");
  ingest->add_option("--rejects", o.rejects, "write the rejects report (JSON) here");
  ingest->add_flag("--strict", o.strict, "exit 1 when any line is rejected");

  auto* build = app.add_subcommand("build", "run in-context builds and append records");
  build->add_option("--jobs", o.jobs, "jobs file (JSON lines)")->required();
  build->add_option("--out", o.out, "corpus file to append to")->required();
  build->add_option("--engine", o.engine, "container engine binary");
  build->add_option("--parallelism", o.parallelism, "concurrent builds")->check(CLI::PositiveNumber);
  build->add_option("--timeout", o.timeout, "per-build limit in seconds")->check(CLI::PositiveNumber);

  auto* cluster = app.add_subcommand("cluster", "embed failing logs and grid-search HDBSCAN");
  cluster->add_option("--corpus", o.corpus, "corpus file")->required();
  cluster->add_option("--grid", o.grid, "\"default\" or mcs:k,mcs:k,...");
  cluster->add_option("--out", o.out, "assignment file (default <corpus>.clusters.json)");
  cluster->add_option("--tail", o.tail, "log tail lines")->check(CLI::PositiveNumber);

  auto* repair = app.add_subcommand("repair", "repair one failing build");
  repair->add_option("--corpus", o.corpus, "corpus file");
  repair->add_option("--record", o.record, "record id");
  repair->add_option("--dockerfile", o.dockerfile, "Dockerfile to repair");
  repair->add_option("--log", o.log, "build log for --dockerfile");
  repair->add_option("--rules", o.rules, "rule file (default: built-in rules)");
  repair->add_option("--out-dir", o.out_dir, "directory for the .fixN files");
  repair->add_option("--search-url", o.search_url, "search backend for the fallback");

  auto* search = app.add_subcommand("search", "top-5 forum leads for a failing build");
  search->add_option("--corpus", o.corpus, "corpus file")->required();
  search->add_option("--record", o.record, "record id")->required();
  search->add_option("--search-url", o.search_url, "search backend base URL");

  auto* report = app.add_subcommand("report", "coverage, solution proportions or breakage");
  report->add_option("--corpus", o.corpus, "corpus file")->required();
  report->add_option("--clusters", o.clusters, "assignment file (default <corpus>.clusters.json)");
  report->add_option("--rules", o.rules, "rule file (default: built-in rules)");
  report->add_flag("--coverage", o.coverage, "repair coverage per rule");
  report->add_flag("--proportions", o.proportions, "solution kinds per cluster");
  report->add_flag("--breakage", o.breakage, "outcome counts and breakage rate");
  report->add_option("--format", o.format, "text, csv or json")
      ->check(CLI::IsMember({"text", "csv", "json"}));
  report->add_option("--out", o.out, "write the report here instead of stdout");

  auto* serve = app.add_subcommand("serve", "run the workbench HTTP service");
  serve->add_option("--corpus", o.corpus, "corpus file");
  serve->add_option("--rules", o.rules, "rule file (created on first save)");
  serve->add_option("--clusters", o.clusters, "assignment file");
  serve->add_option("--host", o.host, "bind address");
  serve->add_option("--port", o.port, "port (default 7341)")->check(CLI::Range(0, 65535));
  serve->add_option("--search-url", o.search_url, "search backend base URL");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitEnvironment;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(o);
    if (build->parsed()) return cmd_build(o);
    if (cluster->parsed()) return cmd_cluster(o);
    if (repair->parsed()) return cmd_repair(o);
    if (search->parsed()) return cmd_search(o);
    if (report->parsed()) return cmd_report(o);
    if (serve->parsed()) return cmd_serve(o);
  } catch (const Failure& f) {
    std::cerr << "dockwright: " << dw_status_name(f.status) << ": " << f.message << "\n";
    return exit_code(f.status);
  } catch (const json::exception& e) {
    std::cerr << "dockwright: unexpected library reply: " << e.what() << "\n";
    return kExitEnvironment;
  }
  return kExitEnvironment;
}
