// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "codeprune/pruner.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <sstream>

#include "codeprune/error.hpp"
#include "codeprune/parallel.hpp"

namespace codeprune {

using nlohmann::json;

std::string_view ffn_rule_name(FfnRule rule) {
    switch (rule) {
        case FfnRule::TopK: return "top_k";
        case FfnRule::BottomK: return "bottom_k";
        case FfnRule::MiddleK: return "middle_k";
        case FfnRule::Random: return "random";
    }
    return "?";
}

FfnRule parse_ffn_rule(std::string_view name) {
    for (FfnRule r : kFfnRules) {
        if (ffn_rule_name(r) == name) return r;
    }
    throw Error(ErrorKind::BadFormat, "unknown FFN rule " + std::string(name));
}

std::string LayerScoreReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "layer,score,criterion\n";
    for (const auto& e : entries) os << e.layer << ',' << e.score << ',' << criterion_name(e.criterion) << '\n';
    return os.str();
}

json plan_to_json(const PrunePlan& p) {
    return json{
        {"kept_token_old_ids", p.kept_token_old_ids},
        {"removed_layers", p.removed_layers},
        {"removed_layers_current", p.removed_layers_current},
        {"ffn_rule", ffn_rule_name(p.ffn_rule)},
        {"ffn_kept_indices", p.ffn_kept_indices},
        {"seed", p.seed},
    };
}

PrunePlan plan_from_json(const json& j) {
    PrunePlan p;
    try {
        j.at("kept_token_old_ids").get_to(p.kept_token_old_ids);
        j.at("removed_layers").get_to(p.removed_layers);
        p.removed_layers_current = j.value("removed_layers_current", std::vector<std::size_t>{});
        p.ffn_rule = parse_ffn_rule(j.at("ffn_rule").get<std::string>());
        j.at("ffn_kept_indices").get_to(p.ffn_kept_indices);
        j.at("seed").get_to(p.seed);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::BadFormat, std::string("prune plan: ") + e.what());
    }
    return p;
}

CalibrationSet filter_correct_samples(const CalibrationSet& calib, const Checkpoint& ckpt, const BpeTokenizer& tok,
                                      const TestExecutor& exec, const FilterOptions& opts) {
    for (const auto& s : calib.samples) {
        if (!s.tests || s.tests->empty()) {
            throw Error(ErrorKind::MissingTests, "sample " + s.id + " has no tests; use pre-verified mode");
        }
    }
    std::vector<char> keep(calib.samples.size(), 0);
    parallel_for(calib.samples.size(), [&](std::size_t i) {
        const auto& s = calib.samples[i];
        const std::string code = generate_text(ckpt, tok, s.prompt, opts.generation);
        keep[i] = tests_pass(exec, code, *s.tests) ? 1 : 0;
    });
    CalibrationSet out;
    out.tokenizer_fingerprint = calib.tokenizer_fingerprint;
    for (std::size_t i = 0; i < calib.samples.size(); ++i) {
        if (keep[i]) out.samples.push_back(calib.samples[i]);
    }
    return out;
}

LayerChoice find_best_layer(const Checkpoint& ckpt, const std::vector<EncodedSample>& encoded,
                            const BaselineDistributions& baseline, Criterion criterion) {
    const std::size_t L = ckpt.layers.size();
    if (L < 2) throw Error(ErrorKind::TooFewLayers, "need at least 2 layers to choose one for removal");
    if (encoded.empty()) throw Error(ErrorKind::EmptyCalibration, "calibration set is empty");

    std::vector<double> scores(L);
    if (criterion == Criterion::Cosine || criterion == Criterion::Angular) {
        const auto sim = layer_similarity(ckpt, encoded);
        scores = criterion == Criterion::Cosine ? sim.cosine : sim.angular;
    } else {
        parallel_for(L, [&](std::size_t l) {
            ForwardOptions skip;
            skip.skip_layer = l;
            scores[l] = criterion == Criterion::Kl ? mean_kl_against(baseline, ckpt, encoded, skip)
                                                   : perplexity(ckpt, encoded, skip);
        });
    }

    const bool maximize = higher_is_more_redundant(criterion);
    LayerChoice choice{0, scores[0], {}};
    for (std::size_t l = 0; l < L; ++l) {
        choice.report.entries.push_back({l, scores[l], criterion});
        if (maximize ? scores[l] > choice.score : scores[l] < choice.score) {
            choice.layer = l;
            choice.score = scores[l];
        }
    }
    return choice;
}

LayerChoice find_best_layer(const Checkpoint& ckpt, const CalibrationSet& calib, const BpeTokenizer& tok,
                            const BaselineDistributions& baseline, Criterion criterion) {
    return find_best_layer(ckpt, encode_calibration(calib, tok), baseline, criterion);
}

Checkpoint remove_layer(const Checkpoint& ckpt, std::size_t layer) {
    const std::size_t L = ckpt.layers.size();
    if (layer >= L) {
        throw Error(ErrorKind::BadLayerIndex, "layer " + std::to_string(layer) + " of " + std::to_string(L));
    }
    if (L < 2) throw Error(ErrorKind::TooFewLayers, "cannot remove the only layer");
    Checkpoint out = ckpt;
    out.layers.erase(out.layers.begin() + static_cast<std::ptrdiff_t>(layer));
    out.config.intermediate_size.erase(out.config.intermediate_size.begin() + static_cast<std::ptrdiff_t>(layer));
    out.config.n_layers = L - 1;
    return out;
}

LayerPruneResult prune_layers(const Checkpoint& ckpt, const CalibrationSet& calib, const BpeTokenizer& tok,
                              std::size_t k, Criterion criterion) {
    if (k >= std::max<std::size_t>(ckpt.layers.size(), 1)) {
        throw Error(ErrorKind::TooFewLayers, "cannot prune " + std::to_string(k) + " of " +
                                                 std::to_string(ckpt.layers.size()) + " layers");
    }
    LayerPruneResult result{ckpt, {}};
    if (k == 0) return result;

    const auto encoded = encode_calibration(calib, tok);
    BaselineDistributions baseline;
    if (criterion == Criterion::Kl) baseline = compute_baseline(ckpt, encoded);

    std::vector<std::size_t> original_ids(ckpt.layers.size());
    std::iota(original_ids.begin(), original_ids.end(), 0);
    for (std::size_t step = 0; step < k; ++step) {
        auto choice = find_best_layer(result.ckpt, encoded, baseline, criterion);
        result.trace.push_back({original_ids[choice.layer], choice.layer, choice.score, std::move(choice.report)});
        original_ids.erase(original_ids.begin() + static_cast<std::ptrdiff_t>(choice.layer));
        result.ckpt = remove_layer(result.ckpt, choice.layer);
    }
    return result;
}

std::vector<std::size_t> ffn_keep_indices(FfnRule rule, std::size_t intermediate, std::size_t keep,
                                          std::uint64_t seed) {
    if (keep == 0 || keep > intermediate) {
        throw Error(ErrorKind::BadK, "keep " + std::to_string(keep) + " of " + std::to_string(intermediate) +
                                         " neurons");
    }
    std::vector<std::size_t> out;
    std::size_t start = 0;
    switch (rule) {
        case FfnRule::TopK: start = 0; break;
        case FfnRule::BottomK: start = intermediate - keep; break;
        case FfnRule::MiddleK: start = (intermediate - keep) / 2; break;
        case FfnRule::Random: {
            std::vector<std::size_t> pool(intermediate);
            std::iota(pool.begin(), pool.end(), 0);
            Lcg64 rng(seed);
            for (std::size_t i = 0; i < keep; ++i) {
                const std::size_t j = i + rng.next() % (intermediate - i);
                std::swap(pool[i], pool[j]);
            }
            out.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep));
            std::sort(out.begin(), out.end());
            return out;
        }
    }
    out.resize(keep);
    std::iota(out.begin(), out.end(), start);
    return out;
}

std::vector<std::vector<std::size_t>> ffn_plan_for_rule(const TransformerConfig& config, FfnRule rule,
                                                        const std::vector<std::size_t>& keep, std::uint64_t seed) {
    if (keep.size() != config.n_layers) {
        throw Error(ErrorKind::BadIndexList, "keep counts do not match the layer count");
    }
    std::vector<std::vector<std::size_t>> plan;
    for (std::size_t l = 0; l < config.n_layers; ++l) {
        plan.push_back(ffn_keep_indices(rule, config.intermediate_size[l], keep[l], seed + l));
    }
    return plan;
}

Checkpoint apply_ffn_plan(const Checkpoint& ckpt, const std::vector<std::vector<std::size_t>>& kept) {
    if (kept.size() != ckpt.layers.size()) {
        throw Error(ErrorKind::BadIndexList, std::to_string(kept.size()) + " index lists for " +
                                                 std::to_string(ckpt.layers.size()) + " layers");
    }
    Checkpoint out = ckpt;
    for (std::size_t l = 0; l < kept.size(); ++l) {
        const auto& idx = kept[l];
        const std::size_t inter = ckpt.config.intermediate_size[l];
        if (idx.empty()) throw Error(ErrorKind::BadIndexList, "layer " + std::to_string(l) + " keeps no neurons");
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] >= inter || (i > 0 && idx[i] <= idx[i - 1])) {
                throw Error(ErrorKind::BadIndexList,
                            "layer " + std::to_string(l) + ": indices must be strictly increasing below " +
                                std::to_string(inter));
            }
        }
        auto& lw = out.layers[l];
        lw.w_gate = select_columns(ckpt.layers[l].w_gate, idx);
        lw.w_up = select_columns(ckpt.layers[l].w_up, idx);
        lw.w_down = select_rows(ckpt.layers[l].w_down, idx);
        out.config.intermediate_size[l] = idx.size();
    }
    return out;
}

FfnSelection select_ffn_rule(const Checkpoint& ckpt, const CalibrationSet& calib, const BpeTokenizer& tok,
                             const std::vector<std::size_t>& keep_per_layer, std::uint64_t seed) {
    const auto encoded = encode_calibration(calib, tok);
    const auto baseline = compute_baseline(ckpt, encoded);

    std::array<std::vector<std::vector<std::size_t>>, 4> plans;
    for (std::size_t r = 0; r < kFfnRules.size(); ++r) {
        plans[r] = ffn_plan_for_rule(ckpt.config, kFfnRules[r], keep_per_layer, seed);
    }
    std::array<double, 4> scores{};
    for (std::size_t r = 0; r < kFfnRules.size(); ++r) {
        scores[r] = mean_kl_against(baseline, apply_ffn_plan(ckpt, plans[r]), encoded);
    }

    std::size_t best = 0;
    for (std::size_t r = 1; r < scores.size(); ++r) {
        if (scores[r] < scores[best]) best = r;
    }
    return {kFfnRules[best], apply_ffn_plan(ckpt, plans[best]), scores, plans[best]};
}

FfnSelection select_ffn_rule(const Checkpoint& ckpt, const CalibrationSet& calib, const BpeTokenizer& tok,
                             std::size_t keep, std::uint64_t seed) {
    return select_ffn_rule(ckpt, calib, tok, std::vector<std::size_t>(ckpt.layers.size(), keep), seed);
}

Checkpoint apply_vocab_plan(const Checkpoint& ckpt, const IdRemap& remap) {
    const auto& kept = remap.kept_old_ids;
    if (kept.empty()) throw Error(ErrorKind::BadRemap, "remap keeps no tokens");
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (kept[i] >= ckpt.config.vocab_size || (i > 0 && kept[i] <= kept[i - 1])) {
            throw Error(ErrorKind::BadRemap, "kept ids must be strictly increasing and below vocab_size");
        }
        auto it = remap.old_to_new.find(kept[i]);
        if (it == remap.old_to_new.end() || it->second != i) {
            throw Error(ErrorKind::BadRemap, "old_to_new disagrees with kept_old_ids");
        }
    }
    if (remap.old_to_new.size() != kept.size()) throw Error(ErrorKind::BadRemap, "old_to_new has extra entries");

    const std::vector<std::size_t> idx(kept.begin(), kept.end());
    Checkpoint out = ckpt;
    out.config.vocab_size = kept.size();
    out.embed = select_rows(ckpt.embed, idx);
    if (!ckpt.config.tied_embeddings) out.lm_head = select_columns(ckpt.lm_head, idx);
    if (ckpt.config.lm_bias) {
        out.lm_bias.clear();
        for (std::size_t i : idx) out.lm_bias.push_back(ckpt.lm_bias[i]);
    }
    return out;
}

TransformerConfig project_config(const TransformerConfig& config, std::size_t vocab_size, std::size_t k_layers,
                                 std::size_t ffn_remove) {
    if (k_layers >= config.n_layers) throw Error(ErrorKind::TooFewLayers, "plan removes every layer");
    TransformerConfig out = config;
    out.vocab_size = vocab_size;
    out.n_layers = config.n_layers - k_layers;
    out.intermediate_size.resize(out.n_layers);
    for (auto& inter : out.intermediate_size) {
        if (ffn_remove >= inter) throw Error(ErrorKind::BadK, "plan removes every FFN neuron");
        inter -= ffn_remove;
    }
    return out;
}

PipelineResult prune_pipeline(const Checkpoint& ckpt, const BpeTokenizer& tok, const std::vector<Bytes>& corpus,
                              const CalibrationSet& calib, const PipelineOptions& opts) {
    using clock = std::chrono::steady_clock;
    auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };
    require_valid(ckpt);
    json report;
    report["parameters"]["input"] = tensor_param_count(ckpt);

    // Vocabulary.
    auto t0 = clock::now();
    const TokenSet tokens = collect_tokens(corpus, tok, opts.frequency_threshold);
    auto [pruned_tok, remap] = prune_tokenizer(tok, tokens);
    const Checkpoint vocab_ckpt = apply_vocab_plan(ckpt, remap);
    report["timings_ms"]["vocab"] = ms_since(t0);
    report["vocab"] = {{"before", tok.size()}, {"after", pruned_tok.size()},
                       {"merges_before", tok.merges().size()}, {"merges_after", pruned_tok.merges().size()}};
    report["parameters"]["after_vocab"] = tensor_param_count(vocab_ckpt);

    // Calibration text is re-encoded with the pruned tokenizer from here on.
    CalibrationSet bound = calib.bound_to(pruned_tok);

    // Layers.
    t0 = clock::now();
    CalibrationSet scoring = bound;
    if (!opts.pre_verified) {
        if (!opts.executor) throw Error(ErrorKind::ExecutorUnavailable, "no executor configured for filtering");
        scoring = filter_correct_samples(bound, vocab_ckpt, pruned_tok, *opts.executor, {opts.generation});
    }
    report["calibration"] = {{"input_samples", calib.samples.size()}, {"scoring_samples", scoring.samples.size()},
                             {"pre_verified", opts.pre_verified}};
    if (scoring.samples.empty()) throw Error(ErrorKind::EmptyCalibration, "no calibration samples survived filtering");

    auto layers = prune_layers(vocab_ckpt, scoring, pruned_tok, opts.k_layers, opts.criterion);
    report["timings_ms"]["layers"] = ms_since(t0);
    json trace = json::array();
    for (const auto& step : layers.trace) {
        trace.push_back({{"original_index", step.original_index},
                         {"current_index", step.current_index},
                         {"score", step.score},
                         {"criterion", criterion_name(opts.criterion)}});
    }
    report["layer_trace"] = trace;
    report["parameters"]["after_layers"] = tensor_param_count(layers.ckpt);

    // FFN.
    t0 = clock::now();
    std::vector<std::size_t> keep;
    for (std::size_t inter : layers.ckpt.config.intermediate_size) {
        if (opts.ffn_remove >= inter) {
            throw Error(ErrorKind::BadK, "ffn_remove " + std::to_string(opts.ffn_remove) + " >= intermediate size " +
                                             std::to_string(inter));
        }
        keep.push_back(inter - opts.ffn_remove);
    }
    auto ffn = select_ffn_rule(layers.ckpt, scoring, pruned_tok, keep, opts.seed);
    report["timings_ms"]["ffn"] = ms_since(t0);
    json ffn_scores = json::object();
    for (std::size_t r = 0; r < kFfnRules.size(); ++r) ffn_scores[std::string(ffn_rule_name(kFfnRules[r]))] = ffn.scores[r];
    report["ffn"] = {{"rule", ffn_rule_name(ffn.rule)}, {"scores", ffn_scores}};
    report["parameters"]["output"] = tensor_param_count(ffn.ckpt);

    require_valid(ffn.ckpt);
    t0 = clock::now();
    report["final_mean_kl"] = mean_calibration_kl(vocab_ckpt, ffn.ckpt, scoring, pruned_tok);
    report["timings_ms"]["final_kl"] = ms_since(t0);

    PrunePlan plan;
    plan.kept_token_old_ids = remap.kept_old_ids;
    for (const auto& step : layers.trace) {
        plan.removed_layers.push_back(step.original_index);
        plan.removed_layers_current.push_back(step.current_index);
    }
    plan.ffn_rule = ffn.rule;
    plan.ffn_kept_indices = ffn.kept;
    plan.seed = opts.seed;

    return {std::move(ffn.ckpt), std::move(pruned_tok), std::move(plan), std::move(report)};
}

}  // namespace codeprune
