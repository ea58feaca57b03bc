// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "codeprune/tensor.hpp"

namespace codeprune {

// Architecture hyper-parameters of a decoder-only transformer.
// intermediate_size has one entry per layer so FFN pruning may leave layers uneven.
struct TransformerConfig {
    std::size_t vocab_size = 0;
    std::size_t d_model = 0;
    std::size_t n_layers = 0;
    std::size_t n_heads = 0;
    std::size_t n_kv_heads = 0;
    std::size_t head_dim = 0;
    std::vector<std::size_t> intermediate_size;
    double rope_theta = 10000.0;
    double rms_eps = 1e-6;
    std::size_t max_seq_len = 0;
    bool qkv_bias = true;
    bool tied_embeddings = false;
    // Output projection carries a bias vector (never with tied embeddings).
    bool lm_bias = false;

    std::size_t q_dim() const { return n_heads * head_dim; }
    std::size_t kv_dim() const { return n_kv_heads * head_dim; }

    bool operator==(const TransformerConfig&) const = default;
};

nlohmann::json config_to_json(const TransformerConfig& config);
TransformerConfig config_from_json(const nlohmann::json& j);

struct LayerWeights {
    Vector attn_norm;
    Matrix wq;  // d_model x q_dim
    Matrix wk;  // d_model x kv_dim
    Matrix wv;  // d_model x kv_dim
    Matrix wo;  // q_dim x d_model
    Vector bq, bk, bv;  // empty unless qkv_bias
    Vector ffn_norm;
    Matrix w_gate;  // d_model x I
    Matrix w_up;    // d_model x I
    Matrix w_down;  // I x d_model
};

struct Checkpoint {
    TransformerConfig config;
    Matrix embed;  // vocab_size x d_model
    std::vector<LayerWeights> layers;
    Vector final_norm;
    Matrix lm_head;  // d_model x vocab_size; empty when tied (embed is used transposed)
    Vector lm_bias;  // vocab_size entries when config.lm_bias
};

// Empty result means the checkpoint is internally consistent.
std::vector<std::string> validate_checkpoint(const Checkpoint& ckpt);
std::vector<std::string> validate_config(const TransformerConfig& config);

// Throws Error{InvalidCheckpoint} listing every violation.
void require_valid(const Checkpoint& ckpt);

Checkpoint load_checkpoint(const std::filesystem::path& path);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

// Bit-exact encode/decode of the container; used by save/load and by tests that
// corrupt payloads in memory.
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

// Builds a zero-initialised checkpoint whose tensor shapes match `config`.
Checkpoint make_zero_checkpoint(const TransformerConfig& config);

// Total stored parameter count computed from the actual tensors.
std::uint64_t tensor_param_count(const Checkpoint& ckpt);
std::uint64_t layer_param_count(const LayerWeights& layer);

// Field-wise bit-identical comparison (config and every tensor).
bool bit_identical(const Checkpoint& a, const Checkpoint& b);

// `inspect` report: config, per-tensor shapes and total parameter count.
nlohmann::json describe_checkpoint(const Checkpoint& ckpt);

}  // namespace codeprune
