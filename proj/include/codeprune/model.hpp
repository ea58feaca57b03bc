// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <set>
#include <span>
#include <vector>

#include "codeprune/checkpoint.hpp"
#include "codeprune/tokenizer.hpp"

namespace codeprune {

// Next-token probabilities over the checkpoint's vocabulary.
struct Distribution {
    std::vector<double> probs;

    std::size_t size() const { return probs.size(); }
};

// T x vocab_size pre-softmax scores, one row per input position.
using LogitsSequence = Matrix;

struct ForwardOptions {
    // Evaluate as if this layer were removed (no copy of the checkpoint is made).
    std::optional<std::size_t> skip_layer;
    // When set, receives n_layers + 1 matrices (T x d_model): entry l is the hidden
    // state entering layer l, the last one is the state before the final norm.
    std::vector<Matrix>* layer_states = nullptr;
};

// Pre-norm decoder stack: rotary positions, causal GQA attention, SwiGLU FFN,
// RMSNorm everywhere, then the output projection.
LogitsSequence forward_logits(const Checkpoint& ckpt, std::span<const TokenId> ids,
                              const ForwardOptions& opts = {});

// Max-subtracted softmax computed in double precision.
Distribution softmax(std::span<const float> logits);

Distribution next_token_distribution(const Checkpoint& ckpt, std::span<const TokenId> ids,
                                     const ForwardOptions& opts = {});

// Element k is the distribution for reference[k] given prompt + reference[0..k).
std::vector<Distribution> teacher_forced_distributions(const Checkpoint& ckpt,
                                                       std::span<const TokenId> prompt,
                                                       std::span<const TokenId> reference,
                                                       const ForwardOptions& opts = {});

// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);
std::size_t argmax(std::span<const float> values);

// Appends argmax tokens until a stop id (not emitted), max_new tokens, or the
// context window is full.
TokenIds greedy_decode(const Checkpoint& ckpt, std::span<const TokenId> prompt, std::size_t max_new,
                       const std::set<TokenId>& stop_ids);

}  // namespace codeprune

namespace codeprune {

struct GenerationOptions {
    std::size_t max_new = 512;
    // Defaults to the tokenizer's special tokens when unset.
    std::optional<std::set<TokenId>> stop_ids;
};

std::set<TokenId> special_token_ids(const BpeTokenizer& tok);

// Encode the prompt, greedy-decode, decode the continuation back to bytes.
std::string generate_text(const Checkpoint& ckpt, const BpeTokenizer& tok, const std::string& prompt,
                          const GenerationOptions& opts);

}  // namespace codeprune
