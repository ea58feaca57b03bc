// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the number
// of failing criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "bpe_trainer.hpp"
#include "codeprune/cli.hpp"
#include "codeprune/metrics.hpp"
#include "codeprune/objective.hpp"
#include "codeprune/pruner.hpp"
#include "codeprune/recovery.hpp"
#include "fixtures.hpp"

using namespace codeprune;
using namespace codeprune::testing;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

Distribution random_dist(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> p(n);
    double s = 0.0;
    for (auto& x : p) {
        x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (rng() % 5 == 0) x = 0.0;  // include exact zeros
        s += x;
    }
    if (s == 0.0) {
        p[0] = 1.0;
        s = 1.0;
    }
    for (auto& x : p) x /= s;
    return Distribution{p};
}

// 1. Pruned tokenizer reproduces the original token strings on every document.
Outcome tokenizer_equivalence() {
    auto training = synthetic_code_corpus(400, 1001);
    const auto prose = synthetic_prose_corpus(400, 1002);
    training.insert(training.end(), prose.begin(), prose.end());
    auto tok = train_bpe(training, 600);
    const auto docs = synthetic_code_corpus(1200, 2002);
    auto [pruned, remap] = prune_tokenizer(tok, collect_tokens(docs, tok));
    std::size_t same = 0;
    for (const auto& d : docs) same += pruned.token_strings(d) == tok.token_strings(d);
    return {same == docs.size(), std::to_string(same) + "/" + std::to_string(docs.size()) + " documents, vocab " +
                                     std::to_string(tok.size()) + " -> " + std::to_string(pruned.size())};
}

// 2. KL identity, non-negativity and the two hand values.
Outcome kl_properties() {
    std::mt19937_64 rng(7);
    double worst_self = 0.0;
    for (int i = 0; i < 10000; ++i) {
        auto p = random_dist(rng, 2 + rng() % 30);
        worst_self = std::max(worst_self, std::abs(kl_divergence(p, p)));
    }
    double min_kl = INFINITY;
    for (int i = 0; i < 100000; ++i) {
        const std::size_t n = 2 + rng() % 30;
        min_kl = std::min(min_kl, kl_divergence(random_dist(rng, n), random_dist(rng, n)));
    }
    const double a = kl_divergence({{0.5, 0.5}}, {{0.25, 0.75}});
    const double b = kl_divergence({{1, 0, 0, 0}}, {{0.25, 0.25, 0.25, 0.25}});
    const bool ok = worst_self <= 1e-12 && min_kl >= -1e-12 && std::abs(a - 0.143841) <= 1e-6 &&
                    std::abs(b - 1.386294) <= 1e-6;
    return {ok, "max KL(p,p) " + fmt(worst_self) + ", min KL " + fmt(min_kl) + ", hand " + fmt(a, 8) + " " + fmt(b, 8)};
}

// 3. An identity layer is removed first and removal is bit-exact.
Outcome identity_layer() {
    auto tok = byte_tokenizer();
    auto calib = synthetic_calibration(6, 303, 10, 6).bound_to(tok);
    auto ck = random_checkpoint(toy_config(tok.size(), 4), 3003);
    const std::size_t j = 2;
    zero_residual_branches(ck, j);
    auto result = prune_layers(ck, calib, tok, 1, Criterion::Kl);
    bool ok = result.trace.size() == 1 && result.trace[0].original_index == j;
    std::size_t identical = 0;
    const auto encoded = encode_calibration(calib, tok);
    for (const auto& e : encoded) {
        const auto in = teacher_forced_input(e);
        identical += bit_equal(forward_logits(result.ckpt, in), forward_logits(ck, in));
    }
    ok = ok && identical == encoded.size();
    return {ok, "removed layer " + (result.trace.empty() ? std::string("-") : std::to_string(result.trace[0].original_index)) +
                    ", bit-identical on " + std::to_string(identical) + "/" + std::to_string(encoded.size()) + " inputs"};
}

// Exhaustive single-removal scores computed without the layer-skip view.
std::vector<double> brute_force_scores(const Checkpoint& ck, const CalibrationSet& calib, const BpeTokenizer& tok,
                                       Criterion c) {
    const auto encoded = encode_calibration(calib, tok);
    const std::size_t L = ck.layers.size();
    std::vector<double> scores(L, 0.0);
    if (c == Criterion::Kl || c == Criterion::Perplexity) {
        for (std::size_t l = 0; l < L; ++l) {
            auto removed = remove_layer(ck, l);
            scores[l] = c == Criterion::Kl ? mean_calibration_kl(ck, removed, calib, tok) : perplexity(removed, encoded);
        }
        return scores;
    }
    std::vector<std::vector<double>> per_layer(L);
    for (const auto& e : encoded) {
        std::vector<Matrix> states;
        ForwardOptions opts;
        opts.layer_states = &states;
        forward_logits(ck, teacher_forced_input(e), opts);
        for (std::size_t l = 0; l < L; ++l) {
            for (std::size_t t = 0; t < states[l].rows; ++t) {
                double dot = 0, na = 0, nb = 0;
                for (std::size_t k = 0; k < states[l].cols; ++k) {
                    const double x = states[l].at(t, k), y = states[l + 1].at(t, k);
                    dot += x * y;
                    na += x * x;
                    nb += y * y;
                }
                const double cs = std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
                per_layer[l].push_back(c == Criterion::Cosine ? cs : std::acos(cs) / M_PI);
            }
        }
    }
    for (std::size_t l = 0; l < L; ++l) {
        double s = 0;
        for (double v : per_layer[l]) s += v;
        scores[l] = s / static_cast<double>(per_layer[l].size());
    }
    return scores;
}

// 4. find_best_layer equals exhaustive enumeration for all criteria.
Outcome greedy_equals_brute_force() {
    auto tok = byte_tokenizer();
    auto calib = synthetic_calibration(3, 404, 8, 5).bound_to(tok);
    const auto encoded = encode_calibration(calib, tok);
    std::mt19937_64 rng(4004);
    std::size_t agree = 0, total = 0;
    std::string first_bad;
    for (int m = 0; m < 20; ++m) {
        const std::size_t L = 2 + rng() % 5;
        auto cfg = toy_config(tok.size(), L, 8, 2, 1 + rng() % 2, 8 + rng() % 9, rng() % 2 == 0);
        auto ck = random_checkpoint(cfg, rng());
        const auto baseline = compute_baseline(ck, encoded);
        for (auto c : {Criterion::Kl, Criterion::Cosine, Criterion::Angular, Criterion::Perplexity}) {
            const auto scores = brute_force_scores(ck, calib, tok, c);
            std::size_t best = 0;
            for (std::size_t l = 1; l < L; ++l) {
                const bool better = higher_is_more_redundant(c) ? scores[l] > scores[best] : scores[l] < scores[best];
                if (better) best = l;
            }
            const auto choice = find_best_layer(ck, encoded, baseline, c);
            ++total;
            if (choice.layer == best && std::abs(choice.score - scores[best]) <= 1e-9 * std::max(1.0, scores[best])) {
                ++agree;
            } else if (first_bad.empty()) {
                first_bad = " (model " + std::to_string(m) + " " + std::string(criterion_name(c)) + ": got " +
                            std::to_string(choice.layer) + ", brute force " + std::to_string(best) + ")";
            }
        }
    }
    return {agree == total, std::to_string(agree) + "/" + std::to_string(total) + " model-criterion pairs" + first_bad};
}

// 5. Integer-exact parameter deltas for all three structural operations.
Outcome parameter_deltas() {
    bool ok = true;
    std::size_t checks = 0;
    std::mt19937_64 rng(505);
    for (int i = 0; i < 12; ++i) {
        auto cfg = toy_config(20 + rng() % 30, 2 + rng() % 4, 8, 2, 1 + rng() % 2, 6 + rng() % 10, rng() % 2 == 0);
        cfg.lm_bias = rng() % 2 == 0;
        const auto ck = random_checkpoint(cfg, rng());
        const std::uint64_t d = cfg.d_model, L = cfg.n_layers;
        const std::uint64_t before = param_count(cfg);
        auto both = [&](const Checkpoint& out, std::uint64_t delta) {
            ++checks;
            ok = ok && before - param_count(out.config) == delta && tensor_param_count(ck) - tensor_param_count(out) == delta;
        };

        const std::size_t R = 1 + rng() % 4;
        std::vector<std::size_t> keep;
        for (auto inter : cfg.intermediate_size) keep.push_back(inter - R);
        both(apply_ffn_plan(ck, ffn_plan_for_rule(cfg, kFfnRules[rng() % 4], keep, rng())), 3 * R * d * L);

        const std::size_t l = rng() % L;
        both(remove_layer(ck, l), layer_param_count(ck.layers[l]));

        std::vector<TokenId> kept;
        for (TokenId t = 0; t < cfg.vocab_size; ++t) {
            if (rng() % 3 != 0) kept.push_back(t);
        }
        const std::uint64_t removed = cfg.vocab_size - kept.size();
        both(apply_vocab_plan(ck, IdRemap::from_kept(kept)), removed * d * 2 + (cfg.lm_bias ? removed : 0));
    }
    return {ok, std::to_string(checks) + " deltas checked on 12 configurations"};
}

const TransformerConfig& pruned_subject() {
    static const TransformerConfig c = project_config(subject_model_config(), 17176, 4, 256);
    return c;
}

// 6. Subject-model plan arithmetic.
Outcome plan_arithmetic() {
    const double dense = static_cast<double>(param_count(subject_model_config()));
    const double pruned = static_cast<double>(param_count(pruned_subject()));
    const double reduction = 100.0 * (1.0 - pruned / dense);
    const bool ok = std::abs(reduction - 22.0) <= 2.0 && std::abs(dense - 7.3e9) <= 0.03 * 7.3e9;
    return {ok, "dense " + fmt(dense, 5) + ", pruned " + fmt(pruned, 5) + ", reduction " + fmt(reduction, 4) + "%"};
}

// 7. FLOPs ratio.
Outcome flops_ratio() {
    const std::size_t context = 1024;
    const double ratio = flops_per_token(pruned_subject(), context) / flops_per_token(subject_model_config(), context);
    return {std::abs(ratio - 0.801) <= 0.03, "pruned/dense " + fmt(ratio, 5) + " at context 1024 (target 0.801)"};
}

// 8. Break-even.
Outcome break_even_point() {
    const auto runs = break_even(152064e12, 1.4e12);
    return {runs == 108617, "break_even(152064 T, 1.4 T) = " + std::to_string(runs)};
}

// 9. Recovery soundness on 50 samples with a process-based stub executor.
Outcome recovery_soundness(const TempDir& dir) {
    auto tok = byte_tokenizer();
    const std::set<int> solved = {0, 3, 4, 7, 9};
    std::map<TokenId, TokenId> next;
    for (int k = 0; k < 10; ++k) {
        const char out = solved.count(k) ? static_cast<char>('A' + k) : 'Z';
        next[*tok.find(std::string(1, static_cast<char>('0' + k)))] = *tok.find(std::string(1, out));
    }
    const auto ck = lookup_checkpoint(tok.size(), next, tok.special_tokens().at("<eos>"));

    std::vector<RecoverySample> data;
    std::set<std::string> expected_replaced;
    for (int i = 0; i < 50; ++i) {
        const int k = i % 10;
        RecoverySample s;
        s.id = "rec" + std::to_string(i);
        s.prompt = "item " + std::to_string(i) + " digit " + std::to_string(k);
        s.target = "reference " + std::to_string(i);
        const char want = i % 7 == 0 ? 'Q' : static_cast<char>('A' + k);
        if (i % 11 != 5) s.tests = {{"case", std::string(1, want)}, {"again", std::string(1, want)}};
        if (!s.tests.empty() && solved.count(k) && want != 'Q') expected_replaced.insert(s.id);
        data.push_back(s);
    }

    write_file(dir / "echo.py", "import json, sys\nprint(json.load(sys.stdin)['code'])\n");
    ProcessExecutor::Options o;
    o.command = "python3 " + (dir / "echo.py").string();
    o.timeout_seconds = 10;
    const ProcessExecutor exec(o);
    const auto out = build_recovery_dataset(data, ck, tok, exec);

    std::set<std::string> replaced;
    bool untouched_identical = out.size() == data.size();
    for (std::size_t i = 0; i < out.size() && i < data.size(); ++i) {
        if (out[i].replaced) {
            replaced.insert(out[i].id);
        } else {
            untouched_identical = untouched_identical && recovery_sample_to_line(out[i]) == recovery_sample_to_line(data[i]);
        }
    }
    const auto failing = reverify_replaced(out, exec);
    const bool ok = replaced == expected_replaced && failing.empty() && untouched_identical;
    return {ok, std::to_string(replaced.size()) + " replaced (expected " + std::to_string(expected_replaced.size()) +
                    "), " + std::to_string(failing.size()) + " fail re-verification, untouched samples " +
                    (untouched_identical ? "byte-identical" : "MODIFIED")};
}

// 10. End-to-end `prune` through the CLI.
Outcome end_to_end(const TempDir& dir) {
    const auto docs = synthetic_code_corpus(80, 1010);
    std::vector<std::string> lines;
    for (const auto& d : docs) {
        std::istringstream is(d);
        for (std::string l; std::getline(is, l);) lines.push_back(l);
    }
    auto training = lines;
    for (const auto& p : synthetic_prose_corpus(300, 1012)) training.push_back(p);
    const auto tok = train_bpe(training, 43);
    if (tok.size() != 300) return {false, "fixture tokenizer has " + std::to_string(tok.size()) + " entries"};
    const auto ck = random_checkpoint(toy_config(300, 4), 10010);
    save_checkpoint(ck, dir / "e2e.pfc");
    save_tokenizer(tok, dir / "e2e_tok.json");
    std::string all, partial;
    for (const auto& l : training) all += l + "\n";  // covers every merge
    for (std::size_t i = 0; i < 30; ++i) partial += lines[i] + "\n";
    write_file(dir / "full.txt", all);
    write_file(dir / "partial.txt", partial);
    auto calib = synthetic_calibration(6, 1011, 12, 8);
    save_calibration_set(calib, dir / "calib.jsonl");

    auto run = [&](const std::string& corpus, const std::string& k, const std::string& r, const std::string& tag) {
        std::ostringstream out, err;
        const int code = run_cli({"prune", "--model", (dir / "e2e.pfc").string(), "--tokenizer",
                                  (dir / "e2e_tok.json").string(), "--corpus", (dir / corpus).string(), "--calib",
                                  (dir / "calib.jsonl").string(), "--k-layers", k, "--ffn-remove", r, "--seed", "5",
                                  "--pre-verified", "--out-model", (dir / (tag + ".pfc")).string(), "--out-tokenizer",
                                  (dir / (tag + ".json")).string()},
                                 out, err);
        if (code != 0) std::cerr << err.str();
        return code;
    };

    if (run("partial.txt", "1", "2", "pruned") != 0) return {false, "prune exited nonzero"};
    const auto pruned = load_checkpoint(dir / "pruned.pfc");
    const auto pruned_tok = load_tokenizer(dir / "pruned.json");
    const bool valid = validate_checkpoint(pruned).empty() && pruned.config.n_layers == 3 &&
                       pruned.config.intermediate_size == std::vector<std::size_t>(3, 14);
    const auto generated = greedy_decode(pruned, pruned_tok.encode(calib.samples[0].prompt), 8,
                                         special_token_ids(pruned_tok));

    if (run("full.txt", "0", "0", "noop") != 0) return {false, "no-op prune exited nonzero"};
    const auto noop = load_checkpoint(dir / "noop.pfc");
    const double kl = mean_calibration_kl(ck, noop, calib.bound_to(tok), tok);
    const bool ok = valid && kl <= 1e-9;
    return {ok, "vocab 300 -> " + std::to_string(pruned.config.vocab_size) + ", layers 4 -> " +
                    std::to_string(pruned.config.n_layers) + ", decoded " + std::to_string(generated.size()) +
                    " tokens, no-op mean KL " + fmt(kl)};
}

// 11. Metric golden values.
Outcome metric_goldens() {
    const double bleu = bleu4("the cat sat on the mat", "the cat sat on a mat");
    const bool bleu_ok = std::abs(bleu - 0.7598) <= 1e-4;

    auto tok = byte_tokenizer();
    auto [set, ck] = digit_task_fixture(tok, {1, 4, 8});
    const auto exec = echo_executor();
    const auto report = pass_at_1(set, ck, tok, exec, {});
    const bool aggregates_ok = report.pass_at_1 && *report.pass_at_1 == 0.3 && report.exact_match == 0.3;
    return {bleu_ok && aggregates_ok, "bleu4 hand case " + fmt(bleu, 6) + " (expected 0.7598), pass@1 " +
                                          fmt(report.pass_at_1.value_or(-1)) + ", EM " + fmt(report.exact_match)};
}

// 12. Kept-token logits survive vocabulary pruning.
Outcome vocab_logits() {
    auto training = synthetic_code_corpus(200, 1212);
    const auto prose = synthetic_prose_corpus(200, 1213);
    training.insert(training.end(), prose.begin(), prose.end());
    auto tok = train_bpe(training, 400);
    const auto docs = synthetic_code_corpus(400, 2121);
    auto [pruned_tok, remap] = prune_tokenizer(tok, collect_tokens(docs, tok));
    auto cfg = toy_config(tok.size(), 2);
    cfg.lm_bias = true;
    const auto ck = random_checkpoint(cfg, 12012);
    const auto pruned = apply_vocab_plan(ck, remap);

    std::mt19937_64 rng(121);
    double worst = 0.0;
    std::size_t prompts = 0;
    for (int i = 0; i < 100; ++i) {
        const auto& doc = docs[rng() % docs.size()];
        const auto old_ids = tok.encode(doc);
        const auto new_ids = pruned_tok.encode(doc);
        if (old_ids.size() != new_ids.size()) return {false, "re-encoding changed the token count"};
        const auto a = forward_logits(ck, old_ids);
        const auto b = forward_logits(pruned, new_ids);
        for (std::size_t k = 0; k < remap.kept_old_ids.size(); ++k) {
            worst = std::max(worst, static_cast<double>(
                                        std::abs(b.at(b.rows - 1, k) - a.at(a.rows - 1, remap.kept_old_ids[k]))));
        }
        ++prompts;
    }
    return {worst <= 1e-6, std::to_string(prompts) + " prompts, " + std::to_string(remap.kept_old_ids.size()) +
                               " kept tokens, max |diff| " + fmt(worst)};
}

}  // namespace

int main() {
    TempDir dir;
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "tokenizer corpus equivalence", 30, tokenizer_equivalence},
        {2, "KL properties", 10, kl_properties},
        {3, "identity-layer exactness", 60, identity_layer},
        {4, "greedy layer choice = brute force", 300, greedy_equals_brute_force},
        {5, "exact parameter deltas", 60, parameter_deltas},
        {6, "plan parameter arithmetic", 1, plan_arithmetic},
        {7, "FLOPs ratio", 1, flops_ratio},
        {8, "break-even", 1, break_even_point},
        {9, "recovery soundness", 60, [&] { return recovery_soundness(dir); }},
        {10, "end-to-end prune", 300, [&] { return end_to_end(dir); }},
        {11, "metric golden values", 10, metric_goldens},
        {12, "vocab-pruning logit preservation", 60, vocab_logits},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.budget_s;
        const bool pass = o.pass && in_time;
        failures += pass ? 0 : 1;
        std::printf("%s  %2d  %-36s %s [%.2fs%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                    in_time ? "" : " over budget");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures;
}
