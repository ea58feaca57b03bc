// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "codeprune/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include "codeprune/error.hpp"

namespace codeprune {

using nlohmann::json;

namespace {

std::uint64_t pair_key(TokenId a, TokenId b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

json bytes_to_json(const Bytes& b) {
    json arr = json::array();
    for (unsigned char c : b) arr.push_back(static_cast<int>(c));
    return arr;
}

Bytes bytes_from_json(const json& j) {
    if (!j.is_array()) throw Error(ErrorKind::BadFormat, "token must be an array of byte values");
    Bytes out;
    for (const auto& v : j) {
        if (!v.is_number_integer()) throw Error(ErrorKind::BadFormat, "byte value must be an integer");
        const int x = v.get<int>();
        if (x < 0 || x > 255) throw Error(ErrorKind::BadFormat, "byte value out of range");
        out.push_back(static_cast<char>(x));
    }
    return out;
}

}  // namespace

BpeTokenizer::BpeTokenizer(std::map<Bytes, TokenId> vocab, std::vector<Merge> merges,
                           std::map<std::string, TokenId> special_tokens)
    : vocab_(std::move(vocab)), merges_(std::move(merges)), special_(std::move(special_tokens)) {
    const std::size_t n = vocab_.size() + special_.size();
    id_to_token_.assign(n, Bytes());
    special_flag_.assign(n, false);
    std::vector<bool> seen(n, false);

    auto claim = [&](TokenId id, const std::string& what) {
        if (id >= n) throw Error(ErrorKind::BadFormat, what + ": id " + std::to_string(id) + " is not dense");
        if (seen[id]) throw Error(ErrorKind::BadFormat, what + ": id " + std::to_string(id) + " is used twice");
        seen[id] = true;
    };
    for (const auto& [tok, id] : vocab_) {
        if (tok.empty()) throw Error(ErrorKind::BadFormat, "empty token in vocab");
        claim(id, "vocab");
        id_to_token_[id] = tok;
    }
    for (const auto& [name, id] : special_) {
        claim(id, "special token " + name);
        id_to_token_[id] = name;
        special_flag_[id] = true;
    }

    for (int b = 0; b < 256; ++b) {
        auto it = vocab_.find(Bytes(1, static_cast<char>(b)));
        if (it == vocab_.end()) {
            throw Error(ErrorKind::BadFormat, "byte token " + std::to_string(b) + " missing from vocab");
        }
        byte_id_[b] = it->second;
    }

    for (std::size_t r = 0; r < merges_.size(); ++r) {
        const auto& [a, b] = merges_[r];
        auto ia = vocab_.find(a);
        auto ib = vocab_.find(b);
        auto iab = vocab_.find(a + b);
        if (ia == vocab_.end() || ib == vocab_.end() || iab == vocab_.end()) {
            throw Error(ErrorKind::BadFormat, "merge " + std::to_string(r) + " references tokens outside vocab");
        }
        // First (lowest-rank) occurrence wins for duplicated pairs.
        merge_table_.try_emplace(pair_key(ia->second, ib->second), MergeEntry{r, iab->second});
    }
}

BpeTokenizer BpeTokenizer::from_merges(const std::vector<Merge>& merges,
                                       const std::vector<std::string>& special_names) {
    std::map<Bytes, TokenId> vocab;
    TokenId next = 0;
    for (int b = 0; b < 256; ++b) vocab.emplace(Bytes(1, static_cast<char>(b)), next++);
    for (const auto& [a, b] : merges) {
        if (vocab.emplace(a + b, next).second) ++next;
    }
    std::map<std::string, TokenId> specials;
    for (const auto& name : special_names) specials.emplace(name, next++);
    return BpeTokenizer(std::move(vocab), merges, std::move(specials));
}

TokenIds BpeTokenizer::encode_traced(std::string_view text, std::vector<Merge>* applied) const {
    TokenIds symbols;
    symbols.reserve(text.size());
    for (unsigned char c : text) symbols.push_back(byte_id_[c]);

    while (symbols.size() >= 2) {
        std::size_t best_rank = std::numeric_limits<std::size_t>::max();
        TokenId left = 0, right = 0, result = 0;
        for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
            auto it = merge_table_.find(pair_key(symbols[i], symbols[i + 1]));
            if (it != merge_table_.end() && it->second.rank < best_rank) {
                best_rank = it->second.rank;
                left = symbols[i];
                right = symbols[i + 1];
                result = it->second.result;
            }
        }
        if (best_rank == std::numeric_limits<std::size_t>::max()) break;

        // Merge every non-overlapping occurrence, scanning left to right.
        TokenIds next;
        next.reserve(symbols.size());
        for (std::size_t i = 0; i < symbols.size();) {
            if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
                next.push_back(result);
                if (applied) applied->push_back(merges_[best_rank]);
                i += 2;
            } else {
                next.push_back(symbols[i]);
                ++i;
            }
        }
        symbols = std::move(next);
    }
    return symbols;
}

TokenIds BpeTokenizer::encode(std::string_view text) const { return encode_traced(text, nullptr); }

Bytes BpeTokenizer::decode(const TokenIds& ids) const {
    Bytes out;
    for (TokenId id : ids) {
        if (id >= id_to_token_.size()) {
            throw Error(ErrorKind::UnknownId, "token id " + std::to_string(id) + " outside vocabulary of " +
                                                  std::to_string(id_to_token_.size()));
        }
        out += id_to_token_[id];
    }
    return out;
}

std::vector<Bytes> BpeTokenizer::token_strings(std::string_view text) const {
    std::vector<Bytes> out;
    for (TokenId id : encode(text)) out.push_back(id_to_token_[id]);
    return out;
}

bool BpeTokenizer::is_special(TokenId id) const { return id < special_flag_.size() && special_flag_[id]; }

const Bytes& BpeTokenizer::token(TokenId id) const {
    if (id >= id_to_token_.size()) throw Error(ErrorKind::UnknownId, "token id " + std::to_string(id));
    return id_to_token_[id];
}

std::optional<TokenId> BpeTokenizer::find(const Bytes& token) const {
    auto it = vocab_.find(token);
    if (it == vocab_.end()) return std::nullopt;
    return it->second;
}

std::uint64_t BpeTokenizer::fingerprint() const {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        // Length terminator keeps ("ab","c") distinct from ("a","bc").
        const std::uint64_t len = s.size();
        for (int b = 0; b < 8; ++b) {
            h ^= static_cast<unsigned char>(len >> (8 * b));
            h *= 1099511628211ULL;
        }
    };
    for (std::size_t id = 0; id < id_to_token_.size(); ++id) {
        mix(special_flag_[id] ? "S" : "T");
        mix(id_to_token_[id]);
    }
    for (const auto& [a, b] : merges_) {
        mix(a);
        mix(b);
    }
    return h;
}

json tokenizer_to_json(const BpeTokenizer& tok) {
    json vocab = json::array();
    // Emit in id order so files diff cleanly.
    std::vector<std::pair<TokenId, const Bytes*>> by_id;
    for (const auto& [t, id] : tok.vocab()) by_id.emplace_back(id, &t);
    std::sort(by_id.begin(), by_id.end());
    for (const auto& [id, t] : by_id) vocab.push_back(json::array({bytes_to_json(*t), id}));

    json merges = json::array();
    for (const auto& [a, b] : tok.merges()) merges.push_back(json::array({bytes_to_json(a), bytes_to_json(b)}));

    json specials = json::object();
    for (const auto& [name, id] : tok.special_tokens()) specials[name] = id;

    return json{{"version", 1}, {"vocab", vocab}, {"merges", merges}, {"special_tokens", specials}};
}

BpeTokenizer tokenizer_from_json(const json& j) {
    try {
        std::map<Bytes, TokenId> vocab;
        for (const auto& entry : j.at("vocab")) {
            if (!entry.is_array() || entry.size() != 2) throw Error(ErrorKind::BadFormat, "vocab entry must be [bytes, id]");
            Bytes t = bytes_from_json(entry[0]);
            if (!vocab.emplace(t, entry[1].get<TokenId>()).second) {
                throw Error(ErrorKind::BadFormat, "duplicate vocab token");
            }
        }
        std::vector<BpeTokenizer::Merge> merges;
        for (const auto& m : j.at("merges")) {
            if (!m.is_array() || m.size() != 2) throw Error(ErrorKind::BadFormat, "merge must be [left, right]");
            merges.emplace_back(bytes_from_json(m[0]), bytes_from_json(m[1]));
        }
        std::map<std::string, TokenId> specials;
        if (j.contains("special_tokens")) {
            for (const auto& [name, id] : j.at("special_tokens").items()) specials.emplace(name, id.get<TokenId>());
        }
        return BpeTokenizer(std::move(vocab), std::move(merges), std::move(specials));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::BadFormat, std::string("tokenizer JSON: ") + e.what());
    }
}

BpeTokenizer load_tokenizer(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::BadFormat, path.string() + ": " + e.what());
    }
    return tokenizer_from_json(j);
}

void save_tokenizer(const BpeTokenizer& tok, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
    out << tokenizer_to_json(tok).dump() << '\n';
    if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

IdRemap IdRemap::identity(std::size_t n) {
    std::vector<TokenId> kept(n);
    for (std::size_t i = 0; i < n; ++i) kept[i] = static_cast<TokenId>(i);
    return from_kept(std::move(kept));
}

IdRemap IdRemap::from_kept(std::vector<TokenId> kept_old_ids) {
    IdRemap r;
    std::sort(kept_old_ids.begin(), kept_old_ids.end());
    kept_old_ids.erase(std::unique(kept_old_ids.begin(), kept_old_ids.end()), kept_old_ids.end());
    for (std::size_t i = 0; i < kept_old_ids.size(); ++i) r.old_to_new.emplace(kept_old_ids[i], static_cast<TokenId>(i));
    r.kept_old_ids = std::move(kept_old_ids);
    return r;
}

TokenSet collect_tokens(const std::vector<Bytes>& corpus, const BpeTokenizer& tok,
                        std::size_t frequency_threshold) {
    TokenSet s;
    for (int b = 0; b < 256; ++b) s.tokens.insert(Bytes(1, static_cast<char>(b)));
    for (const auto& [name, id] : tok.special_tokens()) s.specials.insert(name);

    std::vector<BpeTokenizer::Merge> applied;
    std::map<Bytes, std::size_t> counts;
    for (const auto& doc : corpus) {
        for (TokenId id : tok.encode_traced(doc, &applied)) ++counts[tok.token(id)];
    }

    if (frequency_threshold == 0) {
        for (const auto& [a, b] : applied) {
            s.tokens.insert(a);
            s.tokens.insert(b);
            s.tokens.insert(a + b);
        }
        for (const auto& [t, n] : counts) s.tokens.insert(t);
        return s;
    }

    // Derivation closure of the frequent final tokens.
    std::map<Bytes, std::set<BpeTokenizer::Merge>> producers;
    for (const auto& m : applied) producers[m.first + m.second].insert(m);
    std::vector<Bytes> stack;
    for (const auto& [t, n] : counts) {
        if (n > frequency_threshold) stack.push_back(t);
    }
    while (!stack.empty()) {
        Bytes t = std::move(stack.back());
        stack.pop_back();
        if (!s.tokens.insert(t).second) continue;
        auto it = producers.find(t);
        if (it == producers.end()) continue;
        for (const auto& [a, b] : it->second) {
            if (!s.contains(a)) stack.push_back(a);
            if (!s.contains(b)) stack.push_back(b);
        }
    }
    return s;
}

std::pair<BpeTokenizer, IdRemap> prune_tokenizer(const BpeTokenizer& tok, const TokenSet& s) {
    for (int b = 0; b < 256; ++b) {
        if (!s.contains(Bytes(1, static_cast<char>(b)))) {
            throw Error(ErrorKind::ClosureViolation, "byte token " + std::to_string(b) + " missing from token set");
        }
    }
    for (const auto& [name, id] : tok.special_tokens()) {
        if (s.specials.count(name) == 0) {
            throw Error(ErrorKind::ClosureViolation, "special token " + name + " missing from token set");
        }
    }

    std::vector<BpeTokenizer::Merge> kept_merges;
    std::set<Bytes> buildable;
    for (const auto& [a, b] : tok.merges()) {
        if (s.contains(a) && s.contains(b) && s.contains(a + b)) {
            kept_merges.emplace_back(a, b);
            buildable.insert(a + b);
        }
    }

    std::vector<TokenId> kept;
    for (const auto& [t, id] : tok.vocab()) {
        if (!s.contains(t)) continue;
        if (t.size() > 1 && buildable.count(t) == 0) {
            throw Error(ErrorKind::ClosureViolation,
                        "token id " + std::to_string(id) + " has no retained merge deriving it");
        }
        kept.push_back(id);
    }
    for (const auto& [name, id] : tok.special_tokens()) kept.push_back(id);

    IdRemap remap = IdRemap::from_kept(std::move(kept));

    std::map<Bytes, TokenId> vocab;
    std::map<std::string, TokenId> specials;
    for (const auto& [t, id] : tok.vocab()) {
        if (auto it = remap.old_to_new.find(id); it != remap.old_to_new.end()) vocab.emplace(t, it->second);
    }
    for (const auto& [name, id] : tok.special_tokens()) specials.emplace(name, remap.old_to_new.at(id));

    return {BpeTokenizer(std::move(vocab), std::move(kept_merges), std::move(specials)), std::move(remap)};
}

}  // namespace codeprune
