// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace codeprune {

using TokenId = std::uint32_t;
using TokenIds = std::vector<TokenId>;
// Tokens are arbitrary byte sequences; std::string is used as a byte container.
using Bytes = std::string;

// Byte-level BPE. Special tokens share the dense id space with ordinary tokens
// but are never produced by encode().
class BpeTokenizer {
public:
    using Merge = std::pair<Bytes, Bytes>;

    BpeTokenizer() = default;
    // Validates every invariant; throws Error{BadFormat} on violation.
    BpeTokenizer(std::map<Bytes, TokenId> vocab, std::vector<Merge> merges,
                 std::map<std::string, TokenId> special_tokens);

    // Vocabulary of the 256 single-byte tokens (ids 0..255) plus the given merges,
    // whose products get consecutive ids, and specials after that.
    static BpeTokenizer from_merges(const std::vector<Merge>& merges,
                                    const std::vector<std::string>& special_names);

    TokenIds encode(std::string_view text) const;
    // Encodes and also appends every merge applied along the way (once per firing).
    TokenIds encode_traced(std::string_view text, std::vector<Merge>* applied) const;
    Bytes decode(const TokenIds& ids) const;

    // Byte strings of the final tokens; the comparison basis for corpus equivalence.
    std::vector<Bytes> token_strings(std::string_view text) const;

    std::size_t size() const { return id_to_token_.size(); }
    const std::map<Bytes, TokenId>& vocab() const { return vocab_; }
    const std::vector<Merge>& merges() const { return merges_; }
    const std::map<std::string, TokenId>& special_tokens() const { return special_; }

    bool is_special(TokenId id) const;
    // Token bytes for ordinary ids, the name for specials.
    const Bytes& token(TokenId id) const;
    std::optional<TokenId> find(const Bytes& token) const;

    // Stable 64-bit FNV-1a hash of vocab, merges and specials.
    std::uint64_t fingerprint() const;

private:
    std::map<Bytes, TokenId> vocab_;
    std::vector<Merge> merges_;
    std::map<std::string, TokenId> special_;
    std::vector<Bytes> id_to_token_;
    std::vector<bool> special_flag_;
    struct MergeEntry {
        std::size_t rank;
        TokenId result;
    };
    // Keyed by (left id << 32 | right id).
    std::unordered_map<std::uint64_t, MergeEntry> merge_table_;
    TokenId byte_id_[256] = {};
};

nlohmann::json tokenizer_to_json(const BpeTokenizer& tok);
BpeTokenizer tokenizer_from_json(const nlohmann::json& j);
BpeTokenizer load_tokenizer(const std::filesystem::path& path);
void save_tokenizer(const BpeTokenizer& tok, const std::filesystem::path& path);

// Set S of the vocabulary-pruning procedure.
struct TokenSet {
    std::set<Bytes> tokens;
    std::set<std::string> specials;

    bool contains(const Bytes& t) const { return tokens.count(t) != 0; }
};

struct IdRemap {
    std::map<TokenId, TokenId> old_to_new;
    std::vector<TokenId> kept_old_ids;  // ascending

    static IdRemap identity(std::size_t n);
    static IdRemap from_kept(std::vector<TokenId> kept_old_ids);
};

// Every final token of every document, every intermediate merge product, all
// byte tokens and all specials. A `frequency_threshold` above zero keeps only the
// final tokens seen more than that many times, plus the merge products they need.
TokenSet collect_tokens(const std::vector<Bytes>& corpus, const BpeTokenizer& tok,
                        std::size_t frequency_threshold = 0);

// Keeps vocab ∩ s with dense ids in ascending original order, and the merges whose
// left, right and concatenation are all in s. Throws ClosureViolation if s lacks a
// byte token or special, or holds a multi-byte token no kept merge can build.
std::pair<BpeTokenizer, IdRemap> prune_tokenizer(const BpeTokenizer& tok, const TokenSet& s);

}  // namespace codeprune
