// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dockwright/config.hpp"
#include "dockwright/corpus.hpp"

namespace dockwright::builder {

struct BuildJob {
  std::string repo_ref;                        // clone URL or local directory
  std::string dockerfile_path = "Dockerfile";  // relative to the repository root
  std::string context_dir;                     // relative to the root; empty = root
  double timeout_limit = kDefaultTimeoutSeconds;
  std::string record_id;                       // derived when empty
};

struct ProcessResult {
  std::optional<int> exit_code;  // absent when killed by a signal or not started
  std::string out;
  std::string err;
  double duration = 0.0;
  bool timed_out = false;
  std::string spawn_error;
};

/// Runs argv[0] (PATH lookup) in its own process group, capturing stdout and
/// stderr separately. At the deadline the whole group is killed and what was
/// captured so far is returned.
ProcessResult run_process(const std::vector<std::string>& argv, double timeout_s,
                          const std::filesystem::path& cwd = {});

/// Runs `<engine> version`. Throws ConfigError when the engine is missing or
/// its daemon is unreachable.
void probe_engine(const BuilderSettings& settings);

/// True when any pattern (ECMAScript-free Perl regex, case-insensitive)
/// matches the text.
bool is_daemon_error(std::string_view text, std::span<const std::string> patterns);

/// Instruction kind of the build step that was running when the build
/// failed, from classic "Step N/M : KIND" or BuildKit "#N [stage] KIND"
/// lines. Empty when none is found.
std::string failing_step_kind(std::string_view log);

std::string derive_record_id(const BuildJob& job);

/// Never throws for per-job problems: clone failures, missing Dockerfiles
/// and spawn errors become Undetermined records with details in meta.
BuildRecord run_build(const BuildJob& job, const BuilderSettings& settings);

/// Probes the engine once, then runs jobs on at most `settings.parallelism`
/// workers. Output order matches input order; when `writer` is given each
/// record is appended as soon as all earlier jobs have finished.
std::vector<BuildRecord> run_batch(std::span<const BuildJob> jobs,
                                   const BuilderSettings& settings,
                                   CorpusWriter* writer = nullptr);

}  // namespace dockwright::builder
