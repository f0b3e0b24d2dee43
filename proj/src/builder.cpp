// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The Dockwright Authors

#include "dockwright/builder.hpp"

#include <boost/regex.hpp>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "dockwright/embed.hpp"
#include "dockwright/errors.hpp"

namespace dockwright::builder {

namespace {

using Clock = std::chrono::steady_clock;

std::string now_iso8601() {
  auto t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool inside(const std::filesystem::path& root, const std::filesystem::path& p) {
  auto r = std::filesystem::weakly_canonical(root);
  auto c = std::filesystem::weakly_canonical(p);
  auto rel = c.lexically_relative(r);
  return !rel.empty() && *rel.begin() != "..";
}

std::string repo_dir_name(const std::string& ref) {
  std::string tail = ref;
  while (!tail.empty() && (tail.back() == '/' || tail.back() == '\\')) tail.pop_back();
  if (auto slash = tail.find_last_of("/:"); slash != std::string::npos) tail = tail.substr(slash + 1);
  if (tail.size() > 4 && tail.compare(tail.size() - 4, 4, ".git") == 0) tail.resize(tail.size() - 4);
  std::string clean;
  for (char c : tail) clean += std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_';
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(embed::fnv1a64(ref)));
  return (clean.empty() ? "repo" : clean) + "-" + std::string(hash, 8);
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, double timeout_s,
                          const std::filesystem::path& cwd) {
  ProcessResult result;
  if (argv.empty()) {
    result.spawn_error = "empty command";
    return result;
  }
  int out_pipe[2], err_pipe[2];
  if (pipe2(out_pipe, O_CLOEXEC) != 0) {
    result.spawn_error = std::strerror(errno);
    return result;
  }
  if (pipe2(err_pipe, O_CLOEXEC) != 0) {
    result.spawn_error = std::strerror(errno);
    close(out_pipe[0]);
    close(out_pipe[1]);
    return result;
  }
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  std::string dir = cwd.string();

  auto start = Clock::now();
  pid_t pid = fork();
  if (pid < 0) {
    result.spawn_error = std::strerror(errno);
    for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) close(fd);
    return result;
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    int devnull = open("/dev/null", O_RDONLY);
    if (devnull >= 0) dup2(devnull, STDIN_FILENO);
    if (!dir.empty() && chdir(dir.c_str()) != 0) {
      dprintf(STDERR_FILENO, "cannot chdir to %s: %s\n", dir.c_str(), std::strerror(errno));
      _exit(127);
    }
    execvp(args[0], args.data());
    dprintf(STDERR_FILENO, "cannot execute %s: %s\n", args[0], std::strerror(errno));
    _exit(127);
  }
  setpgid(pid, pid);
  close(out_pipe[1]);
  close(err_pipe[1]);

  auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                              std::chrono::duration<double>(timeout_s));
  pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
  std::string* sinks[2] = {&result.out, &result.err};
  int open_fds = 2;
  int status = 0;
  bool reaped = false;
  char buf[65536];
  auto drain = [&](int wait_ms) {
    int rc = poll(fds, 2, wait_ms);
    if (rc <= 0) return false;
    bool got = false;
    for (int i = 0; i < 2; ++i) {
      if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      auto n = read(fds[i].fd, buf, sizeof buf);
      if (n > 0) {
        sinks[i]->append(buf, static_cast<std::size_t>(n));
        got = true;
      } else if (n == 0 || errno != EINTR) {
        close(fds[i].fd);
        fds[i].fd = -1;
        --open_fds;
      }
    }
    return got;
  };
  while (!reaped) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) {
      result.timed_out = true;
      kill(-pid, SIGKILL);
      waitpid(pid, &status, 0);
      break;
    }
    if (open_fds > 0)
      drain(static_cast<int>(std::min<long long>(left.count(), 50)));
    else
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    if (waitpid(pid, &status, WNOHANG) == pid) reaped = true;
  }
  // Background grandchildren may keep the pipes open; take what is buffered
  // and stop there.
  while (open_fds > 0 && drain(0)) {
  }
  kill(-pid, SIGKILL);
  for (auto& f : fds)
    if (f.fd >= 0) close(f.fd);
  result.duration = std::chrono::duration<double>(Clock::now() - start).count();
  if (!result.timed_out && WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  if (result.timed_out) result.duration = std::max(result.duration, timeout_s);
  return result;
}

void probe_engine(const BuilderSettings& settings) {
  auto r = run_process({settings.engine, "version"}, 60.0);
  if (!r.exit_code || *r.exit_code != 0) {
    std::string why = r.spawn_error.empty() ? r.err : r.spawn_error;
    while (!why.empty() && std::isspace(static_cast<unsigned char>(why.back()))) why.pop_back();
    throw ConfigError("container engine '" + settings.engine + "' is not usable" +
                      (why.empty() ? std::string() : ": " + why));
  }
}

bool is_daemon_error(std::string_view text, std::span<const std::string> patterns) {
  for (const auto& p : patterns) {
    try {
      boost::regex rx(p, boost::regex_constants::perl | boost::regex_constants::icase);
      if (boost::regex_search(text.begin(), text.end(), rx)) return true;
    } catch (const std::runtime_error&) {
      if (text.find(p) != std::string_view::npos) return true;
    }
  }
  return false;
}

std::string failing_step_kind(std::string_view log) {
  static const boost::regex rx(R"(^(?:step \d+/\d+ : |#\d+ \[[^\]]*\] )([a-z]+))",
                               boost::regex_constants::perl | boost::regex_constants::icase);
  std::string kind;
  boost::match_results<std::string_view::const_iterator> m;
  auto it = log.begin();
  while (boost::regex_search(it, log.end(), m, rx)) {
    kind = m[1].str();
    it = m[0].second;
  }
  for (auto& c : kind) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return kind;
}

std::string derive_record_id(const BuildJob& job) {
  if (!job.record_id.empty()) return job.record_id;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(
                    embed::fnv1a64(job.repo_ref + "\n" + job.dockerfile_path)));
  return buf;
}

BuildRecord run_build(const BuildJob& job, const BuilderSettings& settings) {
  BuildRecord rec;
  rec.record_id = derive_record_id(job);
  rec.repo_ref = job.repo_ref;
  rec.dockerfile_path = job.dockerfile_path;
  rec.captured_at = now_iso8601();
  rec.meta["engine"] = settings.engine;
  auto undetermined = [&](std::string key, std::string value) {
    rec.outcome = BuildOutcome::Undetermined;
    rec.meta[std::move(key)] = std::move(value);
    return rec;
  };
  if (job.timeout_limit <= 0) return undetermined("error", "timeout_limit must be positive");

  std::filesystem::path root(job.repo_ref);
  std::error_code ec;
  if (!std::filesystem::is_directory(root, ec)) {
    root = settings.clone_root / repo_dir_name(job.repo_ref);
    if (!std::filesystem::is_directory(root / ".git", ec)) {
      std::filesystem::create_directories(settings.clone_root, ec);
      std::filesystem::remove_all(root, ec);
      auto clone = run_process({"git", "clone", "--depth", "1", job.repo_ref, root.string()},
                               job.timeout_limit);
      if (!clone.exit_code || *clone.exit_code != 0)
        return undetermined("clone_log", clone.out + clone.err + clone.spawn_error);
    }
  }
  auto context = job.context_dir.empty() ? root : root / job.context_dir;
  auto dockerfile = root / job.dockerfile_path;
  if (!inside(root, dockerfile) || !inside(root, context))
    return undetermined("error", "Dockerfile or context escapes the repository");
  if (!std::filesystem::is_regular_file(dockerfile, ec))
    return undetermined("error", "Dockerfile not found: " + job.dockerfile_path);
  rec.dockerfile_text = read_file(dockerfile);

  std::vector<std::string> argv = {settings.engine, "build"};
  argv.insert(argv.end(), settings.extra_flags.begin(), settings.extra_flags.end());
  argv.push_back("-f");
  argv.push_back(std::filesystem::absolute(dockerfile).string());
  argv.push_back(std::filesystem::absolute(context).string());
  auto run = run_process(argv, job.timeout_limit);
  rec.stdout_log = std::move(run.out);
  rec.stderr_log = std::move(run.err);
  rec.duration = run.duration;
  if (!run.spawn_error.empty()) rec.meta["spawn_error"] = run.spawn_error;
  if (run.exit_code) rec.meta["exit_code"] = std::to_string(*run.exit_code);

  bool daemon = run.exit_code.value_or(0) != 0 &&
                is_daemon_error(rec.stderr_log, settings.daemon_error_patterns);
  if (daemon) rec.meta["daemon_error"] = "true";
  rec.outcome = classify_outcome(run.exit_code, run.duration, daemon, job.timeout_limit);
  if (rec.outcome == BuildOutcome::Failure) {
    auto kind = failing_step_kind(rec.stdout_log + "\n" + rec.stderr_log);
    if (!kind.empty()) {
      rec.meta["failing_step"] = kind;
      for (const auto& t : settings.trivial_kinds)
        if (t == kind) rec.meta["trivial"] = "true";
    }
  }
  return rec;
}

std::vector<BuildRecord> run_batch(std::span<const BuildJob> jobs,
                                   const BuilderSettings& settings, CorpusWriter* writer) {
  if (settings.parallelism == 0) throw ValidationError("parallelism must be at least 1");
  std::vector<BuildRecord> out(jobs.size());
  if (jobs.empty()) return out;
  probe_engine(settings);

  std::vector<bool> done(jobs.size(), false);
  std::size_t flushed = 0;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next++; i < jobs.size(); i = next++) {
      auto rec = run_build(jobs[i], settings);
      std::lock_guard lock(mu);
      out[i] = std::move(rec);
      done[i] = true;
      while (flushed < jobs.size() && done[flushed]) {
        if (writer) writer->append(out[flushed]);
        ++flushed;
      }
    }
  };
  std::vector<std::thread> pool;
  auto n = std::min(settings.parallelism, jobs.size());
  for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace dockwright::builder
