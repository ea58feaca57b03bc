// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "codeprune/checkpoint.hpp"
#include "codeprune/executor.hpp"
#include "codeprune/model.hpp"
#include "codeprune/tokenizer.hpp"

namespace codeprune {

struct RecoverySample {
    std::string id;
    std::string prompt;
    std::string target;
    std::vector<TestCase> tests;
    bool replaced = false;

    bool operator==(const RecoverySample&) const = default;
};

// JSON lines: {"id","prompt","target","tests":[{"input","expected"}],"replaced"}.
std::vector<RecoverySample> load_recovery_dataset(const std::string& path);
void save_recovery_dataset(const std::vector<RecoverySample>& data, const std::string& path);
std::string recovery_sample_to_line(const RecoverySample& s);
RecoverySample recovery_sample_from_line(const std::string& line);

// Regenerates every target with `original`. A target is replaced only when the
// generation passes all of the sample's tests; samples without tests are kept.
std::vector<RecoverySample> build_recovery_dataset(const std::vector<RecoverySample>& data, const Checkpoint& original,
                                                   const BpeTokenizer& tok, const TestExecutor& exec,
                                                   const GenerationOptions& gen = {});

// Ids of replaced samples whose target no longer passes its tests.
std::vector<std::string> reverify_replaced(const std::vector<RecoverySample>& data, const TestExecutor& exec);

}  // namespace codeprune
