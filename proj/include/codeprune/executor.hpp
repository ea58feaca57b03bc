// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

namespace codeprune {

struct TestCase {
    std::string input;
    std::string expected;

    bool operator==(const TestCase&) const = default;
};

struct TestOutcome {
    bool passed = false;
    bool timed_out = false;
    int exit_status = 0;  // 128 + signal number when the process was killed
    std::string output;
};

// Runs candidate code against test cases. Test failures are data; only an
// unusable executor throws (ExecutorUnavailable).
class TestExecutor {
public:
    virtual ~TestExecutor() = default;
    virtual TestOutcome run_one(const std::string& code, const TestCase& test) const = 0;
};

// External-process protocol: `<command...> --timeout <seconds>` receives
// {"code","input"} as JSON on stdin. A test passes iff the process exits 0 and
// its trimmed stdout equals the trimmed expected string.
class ProcessExecutor final : public TestExecutor {
public:
    struct Options {
        std::string command;  // whitespace-separated program and arguments
        double timeout_seconds = 10.0;
        std::vector<std::string> env_allowlist = {"PATH", "HOME", "LANG", "LC_ALL", "TMPDIR"};
    };

    explicit ProcessExecutor(Options options);

    TestOutcome run_one(const std::string& code, const TestCase& test) const override;
    const Options& options() const { return options_; }

private:
    Options options_;
    std::vector<std::string> argv_;
};

// In-process executor; the callback decides each verdict.
class FunctionExecutor final : public TestExecutor {
public:
    using Fn = std::function<TestOutcome(const std::string& code, const TestCase& test)>;
    explicit FunctionExecutor(Fn fn) : fn_(std::move(fn)) {}

    TestOutcome run_one(const std::string& code, const TestCase& test) const override { return fn_(code, test); }

private:
    Fn fn_;
};

// One outcome per test, in order. Throws MissingTests on an empty list.
std::vector<TestOutcome> run_tests(const TestExecutor& exec, const std::string& code,
                                   const std::vector<TestCase>& tests);

// Short-circuits on the first failing test.
bool tests_pass(const TestExecutor& exec, const std::string& code, const std::vector<TestCase>& tests);

std::string trim(const std::string& s);

}  // namespace codeprune
