// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "codeprune/checkpoint.hpp"
#include "codeprune/executor.hpp"
#include "codeprune/model.hpp"
#include "codeprune/tokenizer.hpp"

namespace codeprune {

struct CalibrationSample {
    std::string id;
    std::string prompt;     // x, non-empty
    std::string reference;  // y
    std::optional<std::vector<TestCase>> tests;
};

// Samples plus the fingerprint of the tokenizer they are meant to be encoded with.
// An unbound set (no fingerprint) is accepted with any tokenizer.
struct CalibrationSet {
    std::vector<CalibrationSample> samples;
    std::optional<std::uint64_t> tokenizer_fingerprint;

    CalibrationSet bound_to(const BpeTokenizer& tok) const;
};

CalibrationSet load_calibration_set(const std::filesystem::path& path);
void save_calibration_set(const CalibrationSet& set, const std::filesystem::path& path);
CalibrationSample calibration_sample_from_json(const nlohmann::json& j);
nlohmann::json calibration_sample_to_json(const CalibrationSample& s);

// One encoded sample: prompt ids and reference ids.
struct EncodedSample {
    TokenIds prompt;
    TokenIds reference;
};

// Encodes every sample; throws EmptyCalibration / FingerprintMismatch.
std::vector<EncodedSample> encode_calibration(const CalibrationSet& calib, const BpeTokenizer& tok);

constexpr double kKlEpsilon = 1e-12;

// D(p || q) in nats; q is clamped at kKlEpsilon, zero-probability p terms add 0.
double kl_divergence(const Distribution& p, const Distribution& q);

// Per-sample, per-position teacher-forced distributions of one model.
using BaselineDistributions = std::vector<std::vector<Distribution>>;

BaselineDistributions compute_baseline(const Checkpoint& ckpt, const std::vector<EncodedSample>& encoded,
                                       const ForwardOptions& opts = {});

// Mean over all samples and reference positions of KL(baseline || candidate).
double mean_kl_against(const BaselineDistributions& baseline, const Checkpoint& candidate,
                       const std::vector<EncodedSample>& encoded, const ForwardOptions& opts = {});

double mean_calibration_kl(const Checkpoint& original, const Checkpoint& candidate, const CalibrationSet& calib,
                           const BpeTokenizer& tok);

enum class Criterion { Kl, Cosine, Angular, Perplexity };

std::string_view criterion_name(Criterion c);
Criterion parse_criterion(std::string_view name);

// True when a larger score marks a more redundant layer.
bool higher_is_more_redundant(Criterion c);

// exp(mean negative log-likelihood per reference token).
double perplexity(const Checkpoint& ckpt, const std::vector<EncodedSample>& encoded, const ForwardOptions& opts = {});

// Cosine and angular statistics of every layer from a single forward pass per
// sample. Positions are those of the teacher-forced input.
struct LayerSimilarity {
    std::vector<double> cosine;   // mean cos(h_in, h_out), one per layer
    std::vector<double> angular;  // mean arccos(cos) / pi
};
LayerSimilarity layer_similarity(const Checkpoint& ckpt, const std::vector<EncodedSample>& encoded);

// Baseline criteria scores for one layer. Kl is handled by the pruner, which owns
// the fixed original-model baseline.
double layer_score(const Checkpoint& ckpt, std::size_t layer, const CalibrationSet& calib, const BpeTokenizer& tok,
                   Criterion criterion);

// Teacher-forced input of one sample: prompt + reference minus its last token.
TokenIds teacher_forced_input(const EncodedSample& s);

}  // namespace codeprune
