// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixtures.hpp"

#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace codeprune::testing {

namespace {

// Platform-independent uniform draw in [0, 1).
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void fill(std::vector<float>& v, std::mt19937_64& rng, float lo, float hi) {
    for (auto& x : v) x = static_cast<float>(lo + (hi - lo) * unit(rng));
}

}  // namespace

TransformerConfig toy_config(std::size_t vocab, std::size_t layers, std::size_t d_model, std::size_t n_heads,
                             std::size_t n_kv_heads, std::size_t inter, bool qkv_bias, bool tied) {
    TransformerConfig c;
    c.vocab_size = vocab;
    c.d_model = d_model;
    c.n_layers = layers;
    c.n_heads = n_heads;
    c.n_kv_heads = n_kv_heads;
    c.head_dim = d_model / n_heads;
    c.intermediate_size.assign(layers, inter);
    c.rope_theta = 10000.0;
    c.rms_eps = 1e-6;
    c.max_seq_len = 256;
    c.qkv_bias = qkv_bias;
    c.tied_embeddings = tied;
    return c;
}

Checkpoint random_checkpoint(const TransformerConfig& config, std::uint64_t seed, float scale) {
    Checkpoint ck = make_zero_checkpoint(config);
    std::mt19937_64 rng(seed);
    fill(ck.embed.data, rng, -scale, scale);
    for (auto& l : ck.layers) {
        fill(l.attn_norm, rng, 0.5f, 1.5f);
        for (Matrix* m : {&l.wq, &l.wk, &l.wv, &l.wo, &l.w_gate, &l.w_up, &l.w_down}) fill(m->data, rng, -scale, scale);
        fill(l.bq, rng, -scale, scale);
        fill(l.bk, rng, -scale, scale);
        fill(l.bv, rng, -scale, scale);
        fill(l.ffn_norm, rng, 0.5f, 1.5f);
    }
    fill(ck.final_norm, rng, 0.5f, 1.5f);
    fill(ck.lm_head.data, rng, -scale, scale);
    fill(ck.lm_bias, rng, -scale, scale);
    return ck;
}

void zero_residual_branches(Checkpoint& ckpt, std::size_t layer) {
    auto& l = ckpt.layers.at(layer);
    std::fill(l.wo.data.begin(), l.wo.data.end(), 0.0f);
    std::fill(l.w_down.data.begin(), l.w_down.data.end(), 0.0f);
}

BpeTokenizer byte_tokenizer(const std::vector<std::string>& specials) { return BpeTokenizer::from_merges({}, specials); }

std::vector<TokenId> random_ids(std::mt19937_64& rng, std::size_t n, std::size_t vocab) {
    std::vector<TokenId> ids(n);
    for (auto& id : ids) id = static_cast<TokenId>(rng() % vocab);
    return ids;
}

Checkpoint lookup_checkpoint(std::size_t vocab, const std::map<TokenId, TokenId>& next, TokenId fallback,
                             std::size_t layers) {
    TransformerConfig c;
    c.vocab_size = vocab;
    c.d_model = std::max<std::size_t>(next.size(), 2);
    c.n_layers = layers;
    c.n_heads = 1;
    c.n_kv_heads = 1;
    c.head_dim = c.d_model;
    c.intermediate_size.assign(layers, 2);
    c.max_seq_len = 256;
    c.qkv_bias = false;
    c.tied_embeddings = false;
    c.lm_bias = true;
    Checkpoint ck = make_zero_checkpoint(c);
    std::size_t slot = 0;
    for (const auto& [from, to] : next) {
        ck.embed.at(from, slot) = 1.0f;
        ck.lm_head.at(slot, to) = 10.0f;
        ++slot;
    }
    ck.lm_bias.at(fallback) = 1.0f;
    return ck;
}

std::pair<CalibrationSet, Checkpoint> digit_task_fixture(const BpeTokenizer& tok, const std::set<int>& solved) {
    std::map<TokenId, TokenId> next;
    CalibrationSet set;
    for (int k = 0; k < 10; ++k) {
        const char digit = static_cast<char>('0' + k);
        const char letter = static_cast<char>('A' + k);
        next[*tok.find(std::string(1, digit))] = *tok.find(std::string(1, solved.count(k) ? letter : 'Z'));
        CalibrationSample s;
        s.id = "t" + std::to_string(k);
        s.prompt = "task " + std::string(1, digit);
        s.reference = std::string(1, letter);
        s.tests = std::vector<TestCase>{{"", std::string(1, letter)}};
        set.samples.push_back(s);
    }
    return {set, lookup_checkpoint(tok.size(), next, tok.special_tokens().at("<eos>"))};
}

TransformerConfig subject_model_config() {
    TransformerConfig c;
    c.vocab_size = 92416;
    c.d_model = 4096;
    c.n_layers = 32;
    c.n_heads = 32;
    c.n_kv_heads = 4;
    c.head_dim = 128;
    c.intermediate_size.assign(32, 13440);
    c.rope_theta = 1000000.0;
    c.rms_eps = 1e-6;
    c.max_seq_len = 65536;
    c.qkv_bias = true;
    c.tied_embeddings = false;
    return c;
}

std::vector<std::string> synthetic_code_corpus(std::size_t n, std::uint64_t seed) {
    static const std::vector<std::string> names = {"x", "y", "total", "count", "items", "value", "result",
                                                   "idx", "acc", "data", "node", "buf", "key", "left", "right"};
    static const std::vector<std::string> ops = {" + ", " - ", " * ", " // ", " % ", " == ", " < ", " >= "};
    static const std::vector<std::string> funcs = {"len", "sum", "max", "min", "sorted", "range", "abs", "print"};
    std::mt19937_64 rng(seed);
    auto pick = [&](const std::vector<std::string>& v) -> const std::string& { return v[rng() % v.size()]; };
    auto num = [&] { return std::to_string(rng() % 1000); };
    auto expr = [&] {
        std::string e = pick(names);
        const int terms = 1 + static_cast<int>(rng() % 3);
        for (int t = 0; t < terms; ++t) {
            e += pick(ops);
            e += (rng() % 2) ? pick(names) : num();
        }
        return e;
    };
    std::vector<std::string> docs;
    docs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::ostringstream d;
        d << "def " << pick(names) << "_" << i % 97 << "(" << pick(names) << ", " << pick(names) << "):\n";
        const int lines = 1 + static_cast<int>(rng() % 5);
        for (int k = 0; k < lines; ++k) {
            switch (rng() % 4) {
                case 0: d << "    " << pick(names) << " = " << expr() << "\n"; break;
                case 1: d << "    for " << pick(names) << " in " << pick(funcs) << "(" << pick(names) << "):\n        "
                          << pick(names) << " += " << num() << "\n"; break;
                case 2: d << "    if " << expr() << ":\n        return " << pick(funcs) << "(" << pick(names) << ")\n"; break;
                default: d << "    # " << pick(names) << " " << num() << "\n"; break;
            }
        }
        d << "    return " << expr() << "\n";
        if (rng() % 7 == 0) d << "\t\xc3\xa9\xe2\x82\xac\n";  // some non-ASCII bytes
        docs.push_back(d.str());
    }
    return docs;
}

std::vector<std::string> synthetic_prose_corpus(std::size_t n, std::uint64_t seed) {
    static const std::vector<std::string> words = {"The", "quick", "morning", "journey", "through", "quiet",
                                                   "villages", "brought", "unexpected", "weather", "Yesterday",
                                                   "harbour", "lighthouse", "keeper", "whispered", "gently"};
    std::mt19937_64 rng(seed);
    std::vector<std::string> docs;
    for (std::size_t i = 0; i < n; ++i) {
        std::string d;
        const int len = 5 + static_cast<int>(rng() % 10);
        for (int k = 0; k < len; ++k) d += (k ? " " : "") + words[rng() % words.size()];
        docs.push_back(d + ".");
    }
    return docs;
}

CalibrationSet synthetic_calibration(std::size_t n, std::uint64_t seed, std::size_t prompt_len, std::size_t ref_len) {
    const auto docs = synthetic_code_corpus(n, seed);
    CalibrationSet set;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        CalibrationSample s;
        s.id = "s" + std::to_string(i);
        s.prompt = docs[i].substr(0, prompt_len);
        s.reference = docs[i].substr(prompt_len, ref_len);
        set.samples.push_back(s);
    }
    return set;
}

FunctionExecutor echo_executor() {
    return FunctionExecutor([](const std::string& code, const TestCase& t) {
        TestOutcome o;
        o.output = code;
        o.passed = trim(code) == trim(t.expected);
        return o;
    });
}

FunctionExecutor constant_executor(bool pass) {
    return FunctionExecutor([pass](const std::string&, const TestCase&) {
        TestOutcome o;
        o.passed = pass;
        o.exit_status = pass ? 0 : 1;
        return o;
    });
}

TempDir::TempDir() {
    std::string templ = (std::filesystem::temp_directory_path() / "codeprune-XXXXXX").string();
    if (!mkdtemp(templ.data())) throw std::runtime_error("mkdtemp failed");
    path_ = templ;
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f << content;
    if (!f) throw std::runtime_error("cannot write " + p.string());
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace codeprune::testing
