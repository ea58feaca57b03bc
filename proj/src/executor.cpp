// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "codeprune/executor.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include <json.hpp>

#include "codeprune/error.hpp"

extern char** environ;

namespace codeprune {

namespace {

bool is_executable(const std::string& path) {
    struct stat st{};
    return ::stat(path.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(path.c_str(), X_OK) == 0;
}

std::string resolve_program(const std::string& prog) {
    if (prog.find('/') != std::string::npos) return is_executable(prog) ? prog : std::string();
    const char* path = std::getenv("PATH");
    std::istringstream dirs(path ? path : "/usr/bin:/bin");
    std::string dir;
    while (std::getline(dirs, dir, ':')) {
        if (dir.empty()) dir = ".";
        std::string candidate = dir + "/" + prog;
        if (is_executable(candidate)) return candidate;
    }
    return {};
}

struct Fd {
    int fd = -1;
    Fd() = default;
    explicit Fd(int f) : fd(f) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { reset(); }
    void reset() {
        if (fd >= 0) ::close(fd);
        fd = -1;
    }
};

void make_pipe(Fd& r, Fd& w) {
    int p[2];
    if (::pipe2(p, O_CLOEXEC) != 0) throw Error(ErrorKind::ExecutorUnavailable, "pipe failed");
    r.fd = p[0];
    w.fd = p[1];
}

}  // namespace

std::string trim(const std::string& s) {
    const char* ws = " \t\r\n\f\v";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

ProcessExecutor::ProcessExecutor(Options options) : options_(std::move(options)) {
    if (!(options_.timeout_seconds > 0.0)) {
        throw Error(ErrorKind::ExecutorUnavailable, "executor timeout must be positive");
    }
    std::istringstream words(options_.command);
    for (std::string w; words >> w;) argv_.push_back(w);
    if (argv_.empty()) throw Error(ErrorKind::ExecutorUnavailable, "executor command is empty");
    const std::string resolved = resolve_program(argv_[0]);
    if (resolved.empty()) throw Error(ErrorKind::ExecutorUnavailable, "command not found: " + argv_[0]);
    argv_[0] = resolved;
    std::ostringstream t;
    t << options_.timeout_seconds;
    argv_.push_back("--timeout");
    argv_.push_back(t.str());
}

TestOutcome ProcessExecutor::run_one(const std::string& code, const TestCase& test) const {
    const std::string payload =
        nlohmann::json{{"code", code}, {"input", test.input}}.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);

    // Everything the child touches is prepared before fork().
    std::vector<char*> argv;
    for (const auto& a : argv_) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    std::vector<std::string> env_strings;
    for (const auto& name : options_.env_allowlist) {
        if (const char* v = std::getenv(name.c_str())) env_strings.push_back(name + "=" + v);
    }
    std::vector<char*> envp;
    for (auto& e : env_strings) envp.push_back(e.data());
    envp.push_back(nullptr);

    Fd in_r, in_w, out_r, out_w, err_r, err_w;
    make_pipe(in_r, in_w);
    make_pipe(out_r, out_w);
    make_pipe(err_r, err_w);

    const pid_t pid = ::fork();
    if (pid < 0) throw Error(ErrorKind::ExecutorUnavailable, "fork failed");
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(in_r.fd, STDIN_FILENO);
        ::dup2(out_w.fd, STDOUT_FILENO);
        int devnull = ::open("/dev/null", O_WRONLY);
        if (devnull >= 0) ::dup2(devnull, STDERR_FILENO);
        ::execve(argv[0], argv.data(), envp.data());
        const int e = errno;
        [[maybe_unused]] auto n = ::write(err_w.fd, &e, sizeof e);
        ::_exit(127);
    }

    in_r.reset();
    out_w.reset();
    err_w.reset();

    int exec_errno = 0;
    if (::read(err_r.fd, &exec_errno, sizeof exec_errno) == static_cast<ssize_t>(sizeof exec_errno)) {
        int st = 0;
        ::waitpid(pid, &st, 0);
        throw Error(ErrorKind::ExecutorUnavailable, "exec failed: " + std::string(std::strerror(exec_errno)));
    }

    ::fcntl(in_w.fd, F_SETFL, O_NONBLOCK);
    ::fcntl(out_r.fd, F_SETFL, O_NONBLOCK);
    ::signal(SIGPIPE, SIG_IGN);

    TestOutcome outcome;
    std::size_t written = 0;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(options_.timeout_seconds));
    char buf[4096];
    while (out_r.fd >= 0) {
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            outcome.timed_out = true;
            break;
        }
        pollfd fds[2];
        int nfds = 0;
        fds[nfds++] = {out_r.fd, POLLIN, 0};
        if (in_w.fd >= 0) fds[nfds++] = {in_w.fd, POLLOUT, 0};
        const auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
        if (::poll(fds, static_cast<nfds_t>(nfds), static_cast<int>(wait_ms)) < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (nfds == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
            const ssize_t n = ::write(in_w.fd, payload.data() + written, payload.size() - written);
            if (n > 0) written += static_cast<std::size_t>(n);
            if (n < 0 && errno != EAGAIN) written = payload.size();
            if (written == payload.size()) in_w.reset();
        }
        if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
            const ssize_t n = ::read(out_r.fd, buf, sizeof buf);
            if (n > 0) {
                outcome.output.append(buf, static_cast<std::size_t>(n));
            } else if (n == 0 || errno != EAGAIN) {
                out_r.reset();
            }
        }
    }

    if (outcome.timed_out) ::kill(-pid, SIGKILL);
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status)) {
        outcome.exit_status = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        outcome.exit_status = 128 + WTERMSIG(status);
    }
    outcome.passed = !outcome.timed_out && outcome.exit_status == 0 && trim(outcome.output) == trim(test.expected);
    return outcome;
}

std::vector<TestOutcome> run_tests(const TestExecutor& exec, const std::string& code,
                                   const std::vector<TestCase>& tests) {
    if (tests.empty()) throw Error(ErrorKind::MissingTests, "run_tests needs at least one test case");
    std::vector<TestOutcome> out;
    out.reserve(tests.size());
    for (const auto& t : tests) out.push_back(exec.run_one(code, t));
    return out;
}

bool tests_pass(const TestExecutor& exec, const std::string& code, const std::vector<TestCase>& tests) {
    if (tests.empty()) throw Error(ErrorKind::MissingTests, "no test cases to run");
    for (const auto& t : tests) {
        if (!exec.run_one(code, t).passed) return false;
    }
    return true;
}

}  // namespace codeprune
