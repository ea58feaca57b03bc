// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "codeprune/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>

#include "codeprune/error.hpp"

namespace codeprune {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'P', 'F', 'C', '1'};
constexpr const char* kConfigKey = "__config__";

// A named view of one stored tensor. `rows`/`cols` describe the logical shape;
// vectors are reported with a single dimension.
struct TensorRef {
    std::string name;
    std::vector<std::size_t> shape;
    float* data;
    std::size_t count;
};

template <typename Ckpt>
void for_each_tensor(Ckpt& ckpt, const std::function<void(TensorRef)>& fn) {
    auto mat = [&](const std::string& name, auto& m) {
        fn({name, {m.rows, m.cols}, const_cast<float*>(m.data.data()), m.data.size()});
    };
    auto vec = [&](const std::string& name, auto& v) {
        fn({name, {v.size()}, const_cast<float*>(v.data()), v.size()});
    };

    mat("embed", ckpt.embed);
    for (std::size_t i = 0; i < ckpt.layers.size(); ++i) {
        auto& l = ckpt.layers[i];
        const std::string p = "layers." + std::to_string(i) + ".";
        vec(p + "attn_norm", l.attn_norm);
        mat(p + "wq", l.wq);
        mat(p + "wk", l.wk);
        mat(p + "wv", l.wv);
        mat(p + "wo", l.wo);
        if (ckpt.config.qkv_bias) {
            vec(p + "bq", l.bq);
            vec(p + "bk", l.bk);
            vec(p + "bv", l.bv);
        }
        vec(p + "ffn_norm", l.ffn_norm);
        mat(p + "w_gate", l.w_gate);
        mat(p + "w_up", l.w_up);
        mat(p + "w_down", l.w_down);
    }
    vec("final_norm", ckpt.final_norm);
    if (!ckpt.config.tied_embeddings) mat("lm_head", ckpt.lm_head);
    if (ckpt.config.lm_bias) vec("lm_bias", ckpt.lm_bias);
}

void write_f32_le(std::vector<std::uint8_t>& out, const float* data, std::size_t n) {
    const std::size_t start = out.size();
    out.resize(start + n * 4);
    if constexpr (std::endian::native == std::endian::little) {
        if (n != 0) std::memcpy(out.data() + start, data, n * 4);
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const auto bits = std::bit_cast<std::uint32_t>(data[i]);
            for (int b = 0; b < 4; ++b) out[start + i * 4 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
        }
    }
}

void read_f32_le(const std::uint8_t* src, float* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        if (n != 0) std::memcpy(data, src, n * 4);
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(src[i * 4 + b]) << (8 * b);
            data[i] = std::bit_cast<float>(bits);
        }
    }
}

void check_matrix(std::vector<std::string>& out, const std::string& name, const Matrix& m,
                  std::size_t rows, std::size_t cols) {
    if (m.rows != rows || m.cols != cols || m.data.size() != rows * cols) {
        std::ostringstream os;
        os << name << ": shape " << m.rows << "x" << m.cols << " (" << m.data.size()
           << " values), expected " << rows << "x" << cols;
        out.push_back(os.str());
    }
}

void check_vector(std::vector<std::string>& out, const std::string& name, const Vector& v,
                  std::size_t n) {
    if (v.size() != n) {
        out.push_back(name + ": length " + std::to_string(v.size()) + ", expected " +
                      std::to_string(n));
    }
}

}  // namespace

json config_to_json(const TransformerConfig& c) {
    return json{
        {"vocab_size", c.vocab_size},
        {"d_model", c.d_model},
        {"n_layers", c.n_layers},
        {"n_heads", c.n_heads},
        {"n_kv_heads", c.n_kv_heads},
        {"head_dim", c.head_dim},
        {"intermediate_size", c.intermediate_size},
        {"rope_theta", c.rope_theta},
        {"rms_eps", c.rms_eps},
        {"max_seq_len", c.max_seq_len},
        {"qkv_bias", c.qkv_bias},
        {"tied_embeddings", c.tied_embeddings},
        {"lm_bias", c.lm_bias},
    };
}

TransformerConfig config_from_json(const json& j) {
    TransformerConfig c;
    j.at("vocab_size").get_to(c.vocab_size);
    j.at("d_model").get_to(c.d_model);
    j.at("n_layers").get_to(c.n_layers);
    j.at("n_heads").get_to(c.n_heads);
    j.at("n_kv_heads").get_to(c.n_kv_heads);
    j.at("head_dim").get_to(c.head_dim);
    j.at("intermediate_size").get_to(c.intermediate_size);
    j.at("rope_theta").get_to(c.rope_theta);
    j.at("rms_eps").get_to(c.rms_eps);
    j.at("max_seq_len").get_to(c.max_seq_len);
    j.at("qkv_bias").get_to(c.qkv_bias);
    j.at("tied_embeddings").get_to(c.tied_embeddings);
    c.lm_bias = j.value("lm_bias", false);
    return c;
}

std::vector<std::string> validate_config(const TransformerConfig& c) {
    std::vector<std::string> out;
    auto positive = [&](const char* name, std::size_t v) {
        if (v < 1) out.push_back(std::string("config.") + name + " must be >= 1");
    };
    positive("vocab_size", c.vocab_size);
    positive("d_model", c.d_model);
    positive("n_heads", c.n_heads);
    positive("n_kv_heads", c.n_kv_heads);
    positive("head_dim", c.head_dim);
    positive("max_seq_len", c.max_seq_len);
    if (c.n_heads * c.head_dim != c.d_model) {
        out.push_back("config.d_model must equal n_heads * head_dim");
    }
    if (c.n_kv_heads != 0 && c.n_heads % c.n_kv_heads != 0) {
        out.push_back("config.n_kv_heads must divide n_heads (GQA grouping)");
    }
    if (c.intermediate_size.size() != c.n_layers) {
        out.push_back("config.intermediate_size has " + std::to_string(c.intermediate_size.size()) +
                      " entries for " + std::to_string(c.n_layers) + " layers");
    }
    for (std::size_t i = 0; i < c.intermediate_size.size(); ++i) {
        if (c.intermediate_size[i] < 1) {
            out.push_back("config.intermediate_size[" + std::to_string(i) + "] must be >= 1");
        }
    }
    if (!(c.rope_theta > 0.0)) out.push_back("config.rope_theta must be positive");
    if (!(c.rms_eps > 0.0)) out.push_back("config.rms_eps must be positive");
    if (c.tied_embeddings && c.lm_bias) {
        out.push_back("config.lm_bias is not allowed with tied_embeddings");
    }
    return out;
}

std::vector<std::string> validate_checkpoint(const Checkpoint& ckpt) {
    const auto& c = ckpt.config;
    std::vector<std::string> out = validate_config(c);

    check_matrix(out, "embed", ckpt.embed, c.vocab_size, c.d_model);
    if (ckpt.layers.size() != c.n_layers) {
        out.push_back("layers: " + std::to_string(ckpt.layers.size()) +
                      " entries but config.n_layers = " + std::to_string(c.n_layers));
    }
    for (std::size_t i = 0; i < ckpt.layers.size(); ++i) {
        const auto& l = ckpt.layers[i];
        const std::string p = "layers." + std::to_string(i) + ".";
        const std::size_t inter = i < c.intermediate_size.size() ? c.intermediate_size[i] : 0;
        check_vector(out, p + "attn_norm", l.attn_norm, c.d_model);
        check_matrix(out, p + "wq", l.wq, c.d_model, c.q_dim());
        check_matrix(out, p + "wk", l.wk, c.d_model, c.kv_dim());
        check_matrix(out, p + "wv", l.wv, c.d_model, c.kv_dim());
        check_matrix(out, p + "wo", l.wo, c.q_dim(), c.d_model);
        const bool want_bias = c.qkv_bias;
        check_vector(out, p + "bq", l.bq, want_bias ? c.q_dim() : 0);
        check_vector(out, p + "bk", l.bk, want_bias ? c.kv_dim() : 0);
        check_vector(out, p + "bv", l.bv, want_bias ? c.kv_dim() : 0);
        check_vector(out, p + "ffn_norm", l.ffn_norm, c.d_model);
        check_matrix(out, p + "w_gate", l.w_gate, c.d_model, inter);
        check_matrix(out, p + "w_up", l.w_up, c.d_model, inter);
        check_matrix(out, p + "w_down", l.w_down, inter, c.d_model);
    }
    check_vector(out, "final_norm", ckpt.final_norm, c.d_model);
    if (c.tied_embeddings) {
        if (ckpt.lm_head.size() != 0) out.push_back("lm_head: must be empty with tied_embeddings");
    } else {
        check_matrix(out, "lm_head", ckpt.lm_head, c.d_model, c.vocab_size);
    }
    check_vector(out, "lm_bias", ckpt.lm_bias, c.lm_bias ? c.vocab_size : 0);
    return out;
}

void require_valid(const Checkpoint& ckpt) {
    const auto report = validate_checkpoint(ckpt);
    if (report.empty()) return;
    std::string msg;
    for (const auto& v : report) {
        if (!msg.empty()) msg += "; ";
        msg += v;
    }
    throw Error(ErrorKind::InvalidCheckpoint, msg);
}

Checkpoint make_zero_checkpoint(const TransformerConfig& c) {
    Checkpoint ckpt;
    ckpt.config = c;
    ckpt.embed = Matrix(c.vocab_size, c.d_model);
    ckpt.layers.resize(c.n_layers);
    for (std::size_t i = 0; i < c.n_layers; ++i) {
        auto& l = ckpt.layers[i];
        const std::size_t inter = i < c.intermediate_size.size() ? c.intermediate_size[i] : 0;
        l.attn_norm.assign(c.d_model, 1.0f);
        l.wq = Matrix(c.d_model, c.q_dim());
        l.wk = Matrix(c.d_model, c.kv_dim());
        l.wv = Matrix(c.d_model, c.kv_dim());
        l.wo = Matrix(c.q_dim(), c.d_model);
        if (c.qkv_bias) {
            l.bq.assign(c.q_dim(), 0.0f);
            l.bk.assign(c.kv_dim(), 0.0f);
            l.bv.assign(c.kv_dim(), 0.0f);
        }
        l.ffn_norm.assign(c.d_model, 1.0f);
        l.w_gate = Matrix(c.d_model, inter);
        l.w_up = Matrix(c.d_model, inter);
        l.w_down = Matrix(inter, c.d_model);
    }
    ckpt.final_norm.assign(c.d_model, 1.0f);
    if (!c.tied_embeddings) ckpt.lm_head = Matrix(c.d_model, c.vocab_size);
    if (c.lm_bias) ckpt.lm_bias.assign(c.vocab_size, 0.0f);
    return ckpt;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
    require_valid(ckpt);

    json manifest = json::object();
    manifest[kConfigKey] = config_to_json(ckpt.config);
    std::vector<std::uint8_t> payload;
    for_each_tensor(ckpt, [&](TensorRef t) {
        manifest[t.name] = json{{"shape", t.shape}, {"offset", payload.size()}};
        write_f32_le(payload, t.data, t.count);
    });

    const std::string header = manifest.dump();
    std::vector<std::uint8_t> out;
    out.reserve(12 + header.size() + payload.size());
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    const std::uint64_t len = header.size();
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(len >> (8 * b)));
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw Error(ErrorKind::BadMagic, "missing PFC1 magic");
    }
    if (bytes.size() < 12) throw Error(ErrorKind::BadManifest, "truncated header length");
    std::uint64_t header_len = 0;
    for (int b = 0; b < 8; ++b) header_len |= static_cast<std::uint64_t>(bytes[4 + b]) << (8 * b);
    if (header_len > bytes.size() - 12) {
        throw Error(ErrorKind::BadManifest, "header length exceeds file size");
    }

    json manifest;
    try {
        manifest = json::parse(bytes.begin() + 12, bytes.begin() + 12 + static_cast<std::ptrdiff_t>(header_len));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::BadManifest, std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!manifest.is_object() || !manifest.contains(kConfigKey)) {
        throw Error(ErrorKind::BadManifest, "manifest lacks __config__");
    }

    TransformerConfig config;
    try {
        config = config_from_json(manifest.at(kConfigKey));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::BadManifest, std::string("bad __config__: ") + e.what());
    }
    if (auto problems = validate_config(config); !problems.empty()) {
        throw Error(ErrorKind::BadManifest, "invalid __config__: " + problems.front());
    }

    const std::uint8_t* payload = bytes.data() + 12 + header_len;
    const std::size_t payload_len = bytes.size() - 12 - header_len;

    Checkpoint ckpt = make_zero_checkpoint(config);
    std::size_t expected_tensors = 0;
    std::size_t declared_bytes = 0;
    std::vector<std::pair<std::size_t, std::size_t>> extents;  // (offset, bytes)

    for_each_tensor(ckpt, [&](TensorRef t) {
        ++expected_tensors;
        if (!manifest.contains(t.name)) throw Error(ErrorKind::BadManifest, "missing tensor " + t.name);
        const json& entry = manifest.at(t.name);
        std::vector<std::size_t> shape;
        std::size_t offset = 0;
        try {
            entry.at("shape").get_to(shape);
            entry.at("offset").get_to(offset);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::BadManifest, "bad entry for " + t.name + ": " + e.what());
        }
        if (shape != t.shape) {
            throw Error(ErrorKind::ShapeMismatch, t.name + ": manifest shape disagrees with config");
        }
        const std::size_t nbytes = t.count * 4;
        if (offset > payload_len || nbytes > payload_len - offset) {
            throw Error(ErrorKind::ShapeMismatch,
                        t.name + ": declared extent exceeds payload of " + std::to_string(payload_len) + " bytes");
        }
        read_f32_le(payload + offset, t.data, t.count);
        declared_bytes += nbytes;
        extents.emplace_back(offset, nbytes);
    });

    if (manifest.size() != expected_tensors + 1) {
        throw Error(ErrorKind::BadManifest, "manifest names tensors the config does not define");
    }
    if (declared_bytes != payload_len) {
        throw Error(ErrorKind::ShapeMismatch, "payload is " + std::to_string(payload_len) +
                                                  " bytes but manifest declares " + std::to_string(declared_bytes));
    }
    std::sort(extents.begin(), extents.end());
    std::size_t cursor = 0;
    for (const auto& [offset, nbytes] : extents) {
        if (offset != cursor) throw Error(ErrorKind::BadManifest, "tensor extents overlap or leave gaps");
        cursor += nbytes;
    }
    return ckpt;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const auto bytes = serialize_checkpoint(ckpt);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

std::uint64_t layer_param_count(const LayerWeights& l) {
    return l.attn_norm.size() + l.wq.size() + l.wk.size() + l.wv.size() + l.wo.size() + l.bq.size() +
           l.bk.size() + l.bv.size() + l.ffn_norm.size() + l.w_gate.size() + l.w_up.size() + l.w_down.size();
}

std::uint64_t tensor_param_count(const Checkpoint& ckpt) {
    std::uint64_t total = 0;
    for_each_tensor(ckpt, [&](TensorRef t) { total += t.count; });
    return total;
}

bool bit_identical(const Checkpoint& a, const Checkpoint& b) {
    if (!(a.config == b.config) || a.layers.size() != b.layers.size()) return false;
    std::vector<std::pair<std::string, std::span<const float>>> ta, tb;
    for_each_tensor(a, [&](TensorRef t) { ta.emplace_back(t.name, std::span<const float>(t.data, t.count)); });
    for_each_tensor(b, [&](TensorRef t) { tb.emplace_back(t.name, std::span<const float>(t.data, t.count)); });
    if (ta.size() != tb.size()) return false;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        if (ta[i].first != tb[i].first || !bit_equal(ta[i].second, tb[i].second)) return false;
    }
    return true;
}

json describe_checkpoint(const Checkpoint& ckpt) {
    json tensors = json::object();
    for_each_tensor(ckpt, [&](TensorRef t) { tensors[t.name] = t.shape; });
    return json{
        {"config", config_to_json(ckpt.config)},
        {"tensors", tensors},
        {"parameter_count", tensor_param_count(ckpt)},
    };
}

}  // namespace codeprune
