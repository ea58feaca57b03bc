// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "codeprune/checkpoint.hpp"
#include "codeprune/executor.hpp"
#include "codeprune/model.hpp"
#include "codeprune/objective.hpp"
#include "codeprune/tokenizer.hpp"

namespace codeprune {

// 1 iff the strings match after trimming outer whitespace.
int exact_match(const std::string& pred, const std::string& gold);

// BLEU-4 on whitespace tokens: geometric mean of clipped 1..4-gram precisions
// times the brevity penalty. No smoothing, so any empty n-gram match gives 0.
double bleu4(const std::string& pred, const std::string& ref);

struct SampleVerdict {
    std::string id;
    std::string generated;
    std::optional<bool> passed;  // set when tests were run
    int exact_match = 0;
    double bleu = 0.0;
};

struct EvalReport {
    std::vector<SampleVerdict> samples;
    std::optional<double> pass_at_1;
    double exact_match = 0.0;
    double bleu4 = 0.0;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

// Greedy generation per sample, then verdicts. Pass@1 requires tests on every
// sample and an executor.
EvalReport evaluate(const CalibrationSet& samples, const Checkpoint& ckpt, const BpeTokenizer& tok,
                    const TestExecutor* exec, const GenerationOptions& gen);

EvalReport pass_at_1(const CalibrationSet& samples, const Checkpoint& ckpt, const BpeTokenizer& tok,
                     const TestExecutor& exec, const GenerationOptions& gen);

// Exact parameter count implied by a config.
std::uint64_t param_count(const TransformerConfig& config);

// 2 x matmul weights (all projections including the LM head) plus the
// 4 * L * context * d_model attention term, per generated token.
double flops_per_token(const TransformerConfig& config, std::size_t context);

// One-time cost over per-inference savings, rounded to the nearest run.
std::uint64_t break_even(double one_time_cost, double per_inference_savings);

struct EfficiencyReport {
    std::uint64_t dense_params = 0;
    std::uint64_t pruned_params = 0;
    double dense_flops = 0.0;
    double pruned_flops = 0.0;
    std::size_t context = 0;
    std::optional<double> one_time_cost;
    std::optional<std::uint64_t> break_even_runs;

    double param_reduction() const { return 1.0 - static_cast<double>(pruned_params) / static_cast<double>(dense_params); }
    double flops_ratio() const { return pruned_flops / dense_flops; }
    nlohmann::json to_json() const;
};

EfficiencyReport efficiency_report(const TransformerConfig& dense, const TransformerConfig& pruned,
                                   std::size_t context, std::optional<double> one_time_cost = std::nullopt);

}  // namespace codeprune
