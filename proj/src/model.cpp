// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "codeprune/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "codeprune/error.hpp"

namespace codeprune {

namespace {

void rms_norm(std::span<const float> x, std::span<const float> weight, double eps, std::span<float> out) {
    double ss = 0.0;
    for (float v : x) ss += static_cast<double>(v) * v;
    const auto scale = static_cast<float>(1.0 / std::sqrt(ss / static_cast<double>(x.size()) + eps));
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * scale * weight[i];
}

void add_bias(std::span<float> x, const Vector& bias) {
    if (bias.empty()) return;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += bias[i];
}

// Rotates dimension pairs (2i, 2i+1) of one head by pos / theta^(2i/head_dim).
void apply_rope(std::span<float> head, std::size_t pos, double theta) {
    const std::size_t hd = head.size();
    for (std::size_t i = 0; 2 * i + 1 < hd; ++i) {
        const double freq = std::pow(theta, -static_cast<double>(2 * i) / static_cast<double>(hd));
        const double angle = static_cast<double>(pos) * freq;
        const auto c = static_cast<float>(std::cos(angle));
        const auto s = static_cast<float>(std::sin(angle));
        const float x0 = head[2 * i];
        const float x1 = head[2 * i + 1];
        head[2 * i] = x0 * c - x1 * s;
        head[2 * i + 1] = x0 * s + x1 * c;
    }
}

float silu(float x) { return x / (1.0f + std::exp(-x)); }

void attention_block(const TransformerConfig& c, const LayerWeights& l, Matrix& h) {
    const std::size_t T = h.rows;
    const std::size_t d = c.d_model;
    const std::size_t hd = c.head_dim;
    const std::size_t group = c.n_heads / c.n_kv_heads;

    Matrix q(T, c.q_dim()), k(T, c.kv_dim()), v(T, c.kv_dim());
    Vector x(d);
    for (std::size_t t = 0; t < T; ++t) {
        rms_norm(h.row(t), l.attn_norm, c.rms_eps, x);
        matvec(x, l.wq, q.row(t));
        matvec(x, l.wk, k.row(t));
        matvec(x, l.wv, v.row(t));
        add_bias(q.row(t), l.bq);
        add_bias(k.row(t), l.bk);
        add_bias(v.row(t), l.bv);
        for (std::size_t hh = 0; hh < c.n_heads; ++hh) apply_rope(q.row(t).subspan(hh * hd, hd), t, c.rope_theta);
        for (std::size_t kh = 0; kh < c.n_kv_heads; ++kh) apply_rope(k.row(t).subspan(kh * hd, hd), t, c.rope_theta);
    }

    const float inv_sqrt = 1.0f / std::sqrt(static_cast<float>(hd));
    Matrix ctx(T, c.q_dim());
    std::vector<float> scores(T);
    for (std::size_t hh = 0; hh < c.n_heads; ++hh) {
        const std::size_t kh = hh / group;
        for (std::size_t t = 0; t < T; ++t) {
            const float* qt = q.row(t).data() + hh * hd;
            float mx = -std::numeric_limits<float>::infinity();
            for (std::size_t s = 0; s <= t; ++s) {
                const float* ks = k.row(s).data() + kh * hd;
                float dot = 0.0f;
                for (std::size_t i = 0; i < hd; ++i) dot += qt[i] * ks[i];
                scores[s] = dot * inv_sqrt;
                mx = std::max(mx, scores[s]);
            }
            float denom = 0.0f;
            for (std::size_t s = 0; s <= t; ++s) {
                scores[s] = std::exp(scores[s] - mx);
                denom += scores[s];
            }
            float* out = ctx.row(t).data() + hh * hd;
            for (std::size_t s = 0; s <= t; ++s) {
                const float w = scores[s] / denom;
                const float* vs = v.row(s).data() + kh * hd;
                for (std::size_t i = 0; i < hd; ++i) out[i] += w * vs[i];
            }
        }
    }

    Vector o(d);
    for (std::size_t t = 0; t < T; ++t) {
        matvec(ctx.row(t), l.wo, o);
        auto ht = h.row(t);
        for (std::size_t i = 0; i < d; ++i) ht[i] += o[i];
    }
}

void ffn_block(const TransformerConfig& c, const LayerWeights& l, Matrix& h) {
    const std::size_t d = c.d_model;
    const std::size_t inter = l.w_gate.cols;
    Vector x(d), gate(inter), up(inter), down(d);
    for (std::size_t t = 0; t < h.rows; ++t) {
        rms_norm(h.row(t), l.ffn_norm, c.rms_eps, x);
        matvec(x, l.w_gate, gate);
        matvec(x, l.w_up, up);
        for (std::size_t j = 0; j < inter; ++j) gate[j] = silu(gate[j]) * up[j];
        matvec(gate, l.w_down, down);
        auto ht = h.row(t);
        for (std::size_t i = 0; i < d; ++i) ht[i] += down[i];
    }
}

void check_ids(const TransformerConfig& c, std::span<const TokenId> ids) {
    if (ids.empty()) throw Error(ErrorKind::SequenceTooLong, "input sequence is empty");
    if (ids.size() > c.max_seq_len) {
        throw Error(ErrorKind::SequenceTooLong, "input length " + std::to_string(ids.size()) +
                                                    " exceeds max_seq_len " + std::to_string(c.max_seq_len));
    }
    for (TokenId id : ids) {
        if (id >= c.vocab_size) {
            throw Error(ErrorKind::IdOutOfRange,
                        "token id " + std::to_string(id) + " >= vocab_size " + std::to_string(c.vocab_size));
        }
    }
}

}  // namespace

LogitsSequence forward_logits(const Checkpoint& ckpt, std::span<const TokenId> ids, const ForwardOptions& opts) {
    const auto& c = ckpt.config;
    check_ids(c, ids);
    if (opts.skip_layer && *opts.skip_layer >= ckpt.layers.size()) {
        throw Error(ErrorKind::BadLayerIndex, "skip layer " + std::to_string(*opts.skip_layer));
    }

    const std::size_t T = ids.size();
    Matrix h(T, c.d_model);
    for (std::size_t t = 0; t < T; ++t) {
        auto src = ckpt.embed.row(ids[t]);
        std::copy(src.begin(), src.end(), h.row(t).begin());
    }

    if (opts.layer_states) {
        opts.layer_states->clear();
        opts.layer_states->push_back(h);
    }
    for (std::size_t li = 0; li < ckpt.layers.size(); ++li) {
        if (opts.skip_layer != li) {
            attention_block(c, ckpt.layers[li], h);
            ffn_block(c, ckpt.layers[li], h);
        }
        if (opts.layer_states) opts.layer_states->push_back(h);
    }

    LogitsSequence logits(T, c.vocab_size);
    Vector x(c.d_model);
    for (std::size_t t = 0; t < T; ++t) {
        rms_norm(h.row(t), ckpt.final_norm, c.rms_eps, x);
        auto out = logits.row(t);
        if (c.tied_embeddings) {
            for (std::size_t v = 0; v < c.vocab_size; ++v) {
                auto e = ckpt.embed.row(v);
                float dot = 0.0f;
                for (std::size_t i = 0; i < c.d_model; ++i) dot += x[i] * e[i];
                out[v] = dot;
            }
        } else {
            matvec(x, ckpt.lm_head, out);
        }
        add_bias(out, ckpt.lm_bias);
    }
    return logits;
}

Distribution softmax(std::span<const float> logits) {
    Distribution d;
    d.probs.resize(logits.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (float z : logits) mx = std::max(mx, static_cast<double>(z));
    double denom = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        d.probs[i] = std::exp(static_cast<double>(logits[i]) - mx);
        denom += d.probs[i];
    }
    for (double& p : d.probs) p /= denom;
    return d;
}

Distribution next_token_distribution(const Checkpoint& ckpt, std::span<const TokenId> ids,
                                     const ForwardOptions& opts) {
    const auto logits = forward_logits(ckpt, ids, opts);
    return softmax(logits.row(logits.rows - 1));
}

std::vector<Distribution> teacher_forced_distributions(const Checkpoint& ckpt, std::span<const TokenId> prompt,
                                                       std::span<const TokenId> reference,
                                                       const ForwardOptions& opts) {
    if (prompt.empty()) throw Error(ErrorKind::SequenceTooLong, "prompt is empty");
    if (prompt.size() + reference.size() > ckpt.config.max_seq_len) {
        throw Error(ErrorKind::SequenceTooLong, "prompt + reference length " +
                                                    std::to_string(prompt.size() + reference.size()) +
                                                    " exceeds max_seq_len");
    }
    std::vector<Distribution> out;
    if (reference.empty()) return out;

    TokenIds input(prompt.begin(), prompt.end());
    input.insert(input.end(), reference.begin(), reference.end() - 1);
    const auto logits = forward_logits(ckpt, input, opts);
    out.reserve(reference.size());
    for (std::size_t k = 0; k < reference.size(); ++k) out.push_back(softmax(logits.row(prompt.size() - 1 + k)));
    return out;
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

std::size_t argmax(std::span<const float> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

TokenIds greedy_decode(const Checkpoint& ckpt, std::span<const TokenId> prompt, std::size_t max_new,
                       const std::set<TokenId>& stop_ids) {
    TokenIds seq(prompt.begin(), prompt.end());
    TokenIds out;
    while (out.size() < max_new && seq.size() <= ckpt.config.max_seq_len) {
        // No KV cache: the whole prefix is recomputed each step.
        const auto logits = forward_logits(ckpt, seq);
        const auto next = static_cast<TokenId>(argmax(logits.row(logits.rows - 1)));
        if (stop_ids.count(next) != 0) break;
        out.push_back(next);
        seq.push_back(next);
    }
    return out;
}

}  // namespace codeprune

namespace codeprune {

std::set<TokenId> special_token_ids(const BpeTokenizer& tok) {
    std::set<TokenId> ids;
    for (const auto& [name, id] : tok.special_tokens()) ids.insert(id);
    return ids;
}

std::string generate_text(const Checkpoint& ckpt, const BpeTokenizer& tok, const std::string& prompt,
                          const GenerationOptions& opts) {
    const auto stop = opts.stop_ids ? *opts.stop_ids : special_token_ids(tok);
    return tok.decode(greedy_decode(ckpt, tok.encode(prompt), opts.max_new, stop));
}

}  // namespace codeprune
