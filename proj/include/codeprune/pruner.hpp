// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "codeprune/checkpoint.hpp"
#include "codeprune/executor.hpp"
#include "codeprune/model.hpp"
#include "codeprune/objective.hpp"
#include "codeprune/tokenizer.hpp"

namespace codeprune {

enum class FfnRule { TopK, BottomK, MiddleK, Random };

inline constexpr std::array<FfnRule, 4> kFfnRules = {FfnRule::TopK, FfnRule::BottomK, FfnRule::MiddleK,
                                                     FfnRule::Random};

std::string_view ffn_rule_name(FfnRule rule);
FfnRule parse_ffn_rule(std::string_view name);

// 64-bit LCG with fixed constants; output is the high 32 bits of the new state.
class Lcg64 {
public:
    explicit Lcg64(std::uint64_t seed) : state_(seed) {}
    std::uint32_t next() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<std::uint32_t>(state_ >> 32);
    }

private:
    std::uint64_t state_;
};

struct LayerScore {
    std::size_t layer;
    double score;
    Criterion criterion;
};

struct LayerScoreReport {
    std::vector<LayerScore> entries;

    std::string to_csv() const;
};

struct LayerChoice {
    std::size_t layer;
    double score;
    LayerScoreReport report;
};

struct RemovalStep {
    std::size_t original_index;  // index in the model handed to prune_layers
    std::size_t current_index;   // position in the model at the time of removal
    double score;
    LayerScoreReport report;
};

struct PrunePlan {
    std::vector<TokenId> kept_token_old_ids;
    std::vector<std::size_t> removed_layers;          // original indices, removal order
    std::vector<std::size_t> removed_layers_current;  // positions at removal time
    FfnRule ffn_rule = FfnRule::TopK;
    std::vector<std::vector<std::size_t>> ffn_kept_indices;
    std::uint64_t seed = 0;
};

nlohmann::json plan_to_json(const PrunePlan& plan);
PrunePlan plan_from_json(const nlohmann::json& j);

struct FilterOptions {
    GenerationOptions generation;
};

// Keeps the samples whose greedy generation passes every test, in input order.
CalibrationSet filter_correct_samples(const CalibrationSet& calib, const Checkpoint& ckpt, const BpeTokenizer& tok,
                                      const TestExecutor& exec, const FilterOptions& opts = {});

// Scores every remaining layer (as if removed for kl/perplexity) and returns the
// most redundant one; ties go to the lowest index. `baseline` is only read for kl.
LayerChoice find_best_layer(const Checkpoint& ckpt, const std::vector<EncodedSample>& encoded,
                            const BaselineDistributions& baseline, Criterion criterion = Criterion::Kl);
LayerChoice find_best_layer(const Checkpoint& ckpt, const CalibrationSet& calib, const BpeTokenizer& tok,
                            const BaselineDistributions& baseline, Criterion criterion = Criterion::Kl);

Checkpoint remove_layer(const Checkpoint& ckpt, std::size_t layer);

struct LayerPruneResult {
    Checkpoint ckpt;
    std::vector<RemovalStep> trace;
};

// k greedy removals. The kl baseline comes from `ckpt` once and stays fixed.
LayerPruneResult prune_layers(const Checkpoint& ckpt, const CalibrationSet& calib, const BpeTokenizer& tok,
                              std::size_t k, Criterion criterion = Criterion::Kl);

std::vector<std::size_t> ffn_keep_indices(FfnRule rule, std::size_t intermediate, std::size_t keep,
                                          std::uint64_t seed);

// Per-layer index lists for one rule; layer l of the random rule uses seed + l.
std::vector<std::vector<std::size_t>> ffn_plan_for_rule(const TransformerConfig& config, FfnRule rule,
                                                        const std::vector<std::size_t>& keep, std::uint64_t seed);

Checkpoint apply_ffn_plan(const Checkpoint& ckpt, const std::vector<std::vector<std::size_t>>& kept);

struct FfnSelection {
    FfnRule rule;
    Checkpoint ckpt;
    std::array<double, 4> scores;  // indexed like kFfnRules
    std::vector<std::vector<std::size_t>> kept;
};

// Evaluates all four rules and keeps the lowest mean KL against `ckpt`; ties
// resolve in kFfnRules order.
FfnSelection select_ffn_rule(const Checkpoint& ckpt, const CalibrationSet& calib, const BpeTokenizer& tok,
                             std::size_t keep, std::uint64_t seed);
FfnSelection select_ffn_rule(const Checkpoint& ckpt, const CalibrationSet& calib, const BpeTokenizer& tok,
                             const std::vector<std::size_t>& keep_per_layer, std::uint64_t seed);

Checkpoint apply_vocab_plan(const Checkpoint& ckpt, const IdRemap& remap);

struct PipelineOptions {
    std::size_t k_layers = 0;
    std::size_t ffn_remove = 0;
    Criterion criterion = Criterion::Kl;
    std::uint64_t seed = 0;
    std::size_t frequency_threshold = 0;
    // Skip execution-based filtering and trust the calibration references.
    bool pre_verified = false;
    const TestExecutor* executor = nullptr;
    GenerationOptions generation;
};

struct PipelineResult {
    Checkpoint ckpt;
    BpeTokenizer tokenizer;
    PrunePlan plan;
    nlohmann::json report;
};

// Vocabulary pruning, then layer pruning, then FFN pruning.
PipelineResult prune_pipeline(const Checkpoint& ckpt, const BpeTokenizer& tok, const std::vector<Bytes>& corpus,
                              const CalibrationSet& calib, const PipelineOptions& opts);

// Shape-only projection of a plan onto a config: new vocabulary size, the first
// n_layers - k_layers layers, ffn_remove neurons fewer per layer.
TransformerConfig project_config(const TransformerConfig& config, std::size_t vocab_size, std::size_t k_layers,
                                 std::size_t ffn_remove);

}  // namespace codeprune
