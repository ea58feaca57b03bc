// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "codeprune/checkpoint.hpp"
#include "codeprune/executor.hpp"
#include "codeprune/objective.hpp"
#include "codeprune/tokenizer.hpp"

namespace codeprune::testing {

TransformerConfig toy_config(std::size_t vocab, std::size_t layers, std::size_t d_model = 8,
                             std::size_t n_heads = 2, std::size_t n_kv_heads = 1, std::size_t inter = 16,
                             bool qkv_bias = true, bool tied = false);

// Weights uniform in [-scale, scale], norms in [0.5, 1.5].
Checkpoint random_checkpoint(const TransformerConfig& config, std::uint64_t seed, float scale = 0.5f);

// Zeroes wo and w_down of `layer`, which turns the block into the identity.
void zero_residual_branches(Checkpoint& ckpt, std::size_t layer);

// Byte-level tokenizer with no merges.
BpeTokenizer byte_tokenizer(const std::vector<std::string>& specials = {"<eos>"});

// Random token ids in [0, vocab).
std::vector<TokenId> random_ids(std::mt19937_64& rng, std::size_t n, std::size_t vocab);

// Checkpoint whose greedy next token is a function of the last input token only:
// next[t] for mapped tokens, `fallback` otherwise. All layers are zero.
Checkpoint lookup_checkpoint(std::size_t vocab, const std::map<TokenId, TokenId>& next, TokenId fallback,
                             std::size_t layers = 2);

// Ten single-digit tasks: digit k should produce the letter 'A' + k. The lookup
// model answers the digits in `solved` correctly and 'Z' otherwise, then stops.
std::pair<CalibrationSet, Checkpoint> digit_task_fixture(const BpeTokenizer& tok, const std::set<int>& solved);

// Published configuration of the subject model used for analytic checks.
TransformerConfig subject_model_config();

// Generated code-like documents.
std::vector<std::string> synthetic_code_corpus(std::size_t n, std::uint64_t seed);

// Generated English-like sentences; shares few merges with the code corpus.
std::vector<std::string> synthetic_prose_corpus(std::size_t n, std::uint64_t seed);

// Calibration samples drawn from the synthetic corpus: prompt is a prefix,
// reference the following characters.
CalibrationSet synthetic_calibration(std::size_t n, std::uint64_t seed, std::size_t prompt_len = 12,
                                     std::size_t ref_len = 8);

// Executor that passes when the code, trimmed, equals the test's expected output.
FunctionExecutor echo_executor();
FunctionExecutor constant_executor(bool pass);

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    std::filesystem::path path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

void write_file(const std::filesystem::path& p, const std::string& content);
std::string read_file(const std::filesystem::path& p);

}  // namespace codeprune::testing
