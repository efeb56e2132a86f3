#include "rgt/runner.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <vector>

#include "rgt/errors.hpp"

extern char** environ;

namespace rgt {

namespace {

void ignore_sigpipe_once() {
    static std::once_flag flag;
    std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

struct FdGuard {
    int fd = -1;
    FdGuard() = default;
    explicit FdGuard(int f) : fd(f) {}
    FdGuard(const FdGuard&) = delete;
    FdGuard& operator=(const FdGuard&) = delete;
    FdGuard(FdGuard&& other) noexcept : fd(other.fd) { other.fd = -1; }
    FdGuard& operator=(FdGuard&& other) noexcept {
        if (this != &other) {
            close_now();
            fd = other.fd;
            other.fd = -1;
        }
        return *this;
    }
    ~FdGuard() { close_now(); }
    void close_now() {
        if (fd >= 0) ::close(fd);
        fd = -1;
    }
};

struct Spawned {
    pid_t pid = -1;
    FdGuard to_child;     // child stdin
    FdGuard from_child;   // child stdout
    FdGuard from_errors;  // child stderr
};

std::vector<std::string> merged_environment(const std::map<std::string, std::string>& overrides) {
    std::vector<std::string> env;
    for (char** e = environ; *e; ++e) {
        const char* eq = std::strchr(*e, '=');
        if (!eq) continue;
        const std::string name(*e, static_cast<std::size_t>(eq - *e));
        if (overrides.count(name)) continue;
        env.emplace_back(*e);
    }
    for (const auto& [name, value] : overrides) env.push_back(name + "=" + value);
    return env;
}

/// Spawns `/bin/sh -c command` in its own process group with all three
/// standard streams piped.
Spawned spawn_shell(const std::string& command, const fs::path& cwd,
                    const std::map<std::string, std::string>& env_overrides) {
    ignore_sigpipe_once();

    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0 || ::pipe2(out_pipe, O_CLOEXEC) != 0 ||
        ::pipe2(err_pipe, O_CLOEXEC) != 0)
        throw Error("pipe2 failed: " + std::string(std::strerror(errno)));

    Spawned proc;
    proc.to_child = FdGuard(in_pipe[1]);
    proc.from_child = FdGuard(out_pipe[0]);
    proc.from_errors = FdGuard(err_pipe[0]);
    FdGuard child_stdin(in_pipe[0]), child_stdout(out_pipe[1]), child_stderr(err_pipe[1]);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, child_stdin.fd, 0);
    posix_spawn_file_actions_adddup2(&actions, child_stdout.fd, 1);
    posix_spawn_file_actions_adddup2(&actions, child_stderr.fd, 2);
#ifdef __GLIBC__
    posix_spawn_file_actions_addchdir_np(&actions, cwd.c_str());
#endif

    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);

    std::vector<std::string> env_strings = merged_environment(env_overrides);
    std::vector<char*> envp;
    envp.reserve(env_strings.size() + 1);
    for (auto& s : env_strings) envp.push_back(s.data());
    envp.push_back(nullptr);

    const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
    pid_t pid = -1;
    const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, &attr,
                                 const_cast<char* const*>(argv), envp.data());
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attr);
    if (rc != 0) throw Error("posix_spawn failed: " + std::string(std::strerror(rc)));

    proc.pid = pid;
    return proc;
}

void kill_group(pid_t pid) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
}

/// Reaps the child, waiting at most `grace`. Returns the wait status, or
/// nullopt if the child had to be killed first (status then comes from the
/// final blocking wait).
int reap(pid_t pid, Millis grace) {
    const auto deadline = Clock::now() + grace;
    int status = 0;
    for (;;) {
        const pid_t r = ::waitpid(pid, &status, WNOHANG);
        if (r == pid) return status;
        if (r < 0 && errno != EINTR) return -1;
        if (Clock::now() >= deadline) {
            kill_group(pid);
            while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {}
            return status;
        }
        ::usleep(2000);
    }
}

std::string describe_exit(int status) {
    if (status < 0) return "wait failed";
    if (WIFEXITED(status)) return "exited with status " + std::to_string(WEXITSTATUS(status));
    if (WIFSIGNALED(status)) return "terminated by signal " + std::to_string(WTERMSIG(status));
    return "unknown wait status";
}

constexpr std::size_t kMaxReplyBytes = 1 << 20;
constexpr std::size_t kMaxStderrBytes = 4096;

/// Feeds `input` to the child and collects stdout until one full line, EOF,
/// or the deadline. Returns false on deadline.
bool pump(Spawned& proc, const std::string& input, Clock::time_point deadline,
          std::string& stdout_buf, std::string& stderr_buf, bool want_line) {
    ::fcntl(proc.to_child.fd, F_SETFL, O_NONBLOCK);
    std::size_t written = 0;
    bool stdin_open = true;

    for (;;) {
        if (want_line && stdout_buf.find('\n') != std::string::npos) return true;

        const auto now = Clock::now();
        if (now >= deadline) return false;
        const int wait_ms = static_cast<int>(std::min<long long>(
            std::chrono::duration_cast<Millis>(deadline - now).count(), 50));

        struct pollfd fds[3];
        nfds_t nfds = 0;
        const int out_idx = static_cast<int>(nfds);
        fds[nfds++] = {proc.from_child.fd, POLLIN, 0};
        int err_idx = -1;
        if (proc.from_errors.fd >= 0) {
            err_idx = static_cast<int>(nfds);
            fds[nfds++] = {proc.from_errors.fd, POLLIN, 0};
        }
        int in_idx = -1;
        if (stdin_open && written < input.size()) {
            in_idx = static_cast<int>(nfds);
            fds[nfds++] = {proc.to_child.fd, POLLOUT, 0};
        }

        const int rc = ::poll(fds, nfds, wait_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            return true;  // treat as EOF; caller inspects what arrived
        }
        if (rc == 0) continue;

        if (in_idx >= 0 && (fds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP))) {
            const ssize_t n = ::write(proc.to_child.fd, input.data() + written,
                                      input.size() - written);
            if (n > 0) {
                written += static_cast<std::size_t>(n);
            } else if (n < 0 && errno != EAGAIN && errno != EINTR) {
                stdin_open = false;  // child went away or closed stdin
                proc.to_child.close_now();
            }
            if (written >= input.size()) proc.to_child.close_now();
        }

        if (err_idx >= 0 && (fds[err_idx].revents & (POLLIN | POLLHUP))) {
            char buf[1024];
            const ssize_t n = ::read(proc.from_errors.fd, buf, sizeof buf);
            if (n > 0) {
                if (stderr_buf.size() < kMaxStderrBytes)
                    stderr_buf.append(buf, buf + std::min<std::size_t>(
                                               static_cast<std::size_t>(n),
                                               kMaxStderrBytes - stderr_buf.size()));
            } else if (n == 0) {
                proc.from_errors.close_now();
            }
        }

        if (fds[out_idx].revents & (POLLIN | POLLHUP)) {
            char buf[4096];
            const ssize_t n = ::read(proc.from_child.fd, buf, sizeof buf);
            if (n > 0) {
                if (stdout_buf.size() + static_cast<std::size_t>(n) > kMaxReplyBytes)
                    return true;  // oversized reply; caller reports protocol error
                stdout_buf.append(buf, static_cast<std::size_t>(n));
            } else if (n == 0) {
                return true;  // EOF
            } else if (errno != EAGAIN && errno != EINTR) {
                return true;
            }
        }
    }
}

Outcome parse_reply(const std::string& line, const std::string& stderr_buf, Millis wall) {
    Json reply = Json::parse(line, nullptr, false);
    if (reply.is_discarded() || !reply.is_object()) {
        Outcome o = Outcome::make_error("malformed adapter reply: " + line.substr(0, 200));
        o.wall_time = wall;
        return o;
    }
    const std::string status = reply.value("status", std::string{});
    if (status == "value" && reply.contains("value")) {
        Outcome o = Outcome::make_value(reply.at("value"));
        o.wall_time = wall;
        return o;
    }
    if (status == "exception" && reply.contains("type") && reply.at("type").is_string()) {
        std::optional<std::string> site;
        if (reply.contains("site") && reply.at("site").is_string())
            site = reply.at("site").get<std::string>();
        Outcome o = Outcome::make_exception(reply.at("type").get<std::string>(), site);
        o.wall_time = wall;
        return o;
    }
    Outcome o = Outcome::make_error("unrecognized adapter reply: " + line.substr(0, 200) +
                                    (stderr_buf.empty() ? "" : " | stderr: " + stderr_buf));
    o.wall_time = wall;
    return o;
}

}  // namespace

Outcome run_once(const ProgramDescriptor& prog, const Json& input, const RunOptions& opts) {
    if (prog.run_command.empty()) return Outcome::make_error("empty run command");

    std::map<std::string, std::string> env = prog.env;
    env["RGT_TEST_SEED"] = std::to_string(opts.exec_seed);

    Json record;
    record["input"] = input;
    const std::string input_line = record.dump() + "\n";

    const auto start = Clock::now();
    const auto deadline = start + opts.timeout;

    Spawned proc;
    try {
        proc = spawn_shell(prog.run_command, prog.working_dir, env);
    } catch (const Error& e) {
        return Outcome::make_error(e.what());
    }

    std::string out_buf, err_buf;
    const bool finished = pump(proc, input_line, deadline, out_buf, err_buf, true);

    if (!finished) {
        kill_group(proc.pid);
        int status = 0;
        while (::waitpid(proc.pid, &status, 0) < 0 && errno == EINTR) {}
        Outcome o = Outcome::make_timeout(since(start));
        o.diagnostic = "killed at deadline";
        return o;
    }

    const std::size_t nl = out_buf.find('\n');
    if (nl != std::string::npos) {
        // Well-formed reply candidate; the exit code no longer matters, but
        // the child must still be reaped (and killed if it lingers).
        const auto grace_left = std::chrono::duration_cast<Millis>(deadline - Clock::now());
        reap(proc.pid, std::min<Millis>(std::max<Millis>(grace_left, Millis{0}), Millis{150}));
        return parse_reply(out_buf.substr(0, nl), err_buf, since(start));
    }

    const int status = reap(proc.pid, Millis{50});
    std::string diag = "adapter produced no reply (" + describe_exit(status) + ")";
    if (!out_buf.empty()) diag += "; partial stdout: " + out_buf.substr(0, 200);
    if (!err_buf.empty()) diag += "; stderr: " + err_buf;
    Outcome o = Outcome::make_error(diag);
    o.wall_time = since(start);
    return o;
}

BuildResult run_build(const ProgramDescriptor& prog, Millis timeout) {
    BuildResult result;
    result.built_dir = prog.working_dir;
    if (!prog.build_command || prog.build_command->empty()) {
        result.ok = true;
        return result;
    }

    Spawned proc;
    try {
        proc = spawn_shell(*prog.build_command + " 2>&1", prog.working_dir, prog.env);
    } catch (const Error& e) {
        result.log = e.what();
        return result;
    }
    proc.to_child.close_now();

    std::string out_buf, err_buf;
    const bool finished = pump(proc, std::string{}, Clock::now() + timeout, out_buf, err_buf, false);
    if (!finished) {
        kill_group(proc.pid);
        int status = 0;
        while (::waitpid(proc.pid, &status, 0) < 0 && errno == EINTR) {}
        result.log = out_buf + "\n[build timed out]";
        return result;
    }
    const int status = reap(proc.pid, timeout);
    result.log = out_buf;
    result.ok = status >= 0 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
    if (!result.ok) result.log += "\n[" + describe_exit(status) + "]";
    return result;
}

BuildResult BuildCache::build(const ProgramDescriptor& prog, const std::string& tree_digest,
                              Millis timeout) {
    std::shared_future<BuildResult> future;
    std::promise<BuildResult> promise;
    bool owner = false;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = builds_.find(tree_digest);
        if (it == builds_.end()) {
            future = promise.get_future().share();
            builds_.emplace(tree_digest, future);
            owner = true;
        } else {
            future = it->second;
        }
    }
    if (owner) {
        try {
            promise.set_value(run_build(prog, timeout));
        } catch (...) {
            promise.set_exception(std::current_exception());
        }
    }
    return future.get();
}

}  // namespace rgt
