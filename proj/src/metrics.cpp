// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "codeprune/metrics.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "codeprune/error.hpp"
#include "codeprune/parallel.hpp"

namespace codeprune {

using nlohmann::json;

int exact_match(const std::string& pred, const std::string& gold) { return trim(pred) == trim(gold) ? 1 : 0; }

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string w; is >> w;) out.push_back(w);
    return out;
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(const std::vector<std::string>& toks, std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> counts;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
        ++counts[std::vector<std::string>(toks.begin() + static_cast<std::ptrdiff_t>(i),
                                          toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return counts;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return pairwise_sum(v) / static_cast<double>(v.size());
}

}  // namespace

double bleu4(const std::string& pred, const std::string& ref) {
    const auto hyp = split_ws(pred);
    const auto gold = split_ws(ref);
    if (hyp.empty() || gold.empty()) return 0.0;

    double log_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        if (hyp.size() < n) return 0.0;
        const auto h = ngram_counts(hyp, n);
        const auto r = ngram_counts(gold, n);
        std::size_t clipped = 0;
        for (const auto& [gram, count] : h) {
            auto it = r.find(gram);
            if (it != r.end()) clipped += std::min(count, it->second);
        }
        if (clipped == 0) return 0.0;
        log_sum += std::log(static_cast<double>(clipped) / static_cast<double>(hyp.size() - n + 1));
    }
    const double c = static_cast<double>(hyp.size());
    const double r = static_cast<double>(gold.size());
    const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    return bp * std::exp(log_sum / 4.0);
}

json EvalReport::to_json() const {
    json per = json::array();
    for (const auto& s : samples) {
        json j{{"id", s.id}, {"generated", s.generated}, {"exact_match", s.exact_match}, {"bleu4", s.bleu}};
        if (s.passed) j["passed"] = *s.passed;
        per.push_back(j);
    }
    json j{{"count", samples.size()}, {"exact_match", exact_match}, {"bleu4", bleu4}, {"samples", per}};
    j["pass_at_1"] = pass_at_1 ? json(*pass_at_1) : json(nullptr);
    return j;
}

std::string EvalReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "id,passed,exact_match,bleu4\n";
    for (const auto& s : samples) {
        os << json(s.id).dump() << ',' << (s.passed ? (*s.passed ? "1" : "0") : "") << ',' << s.exact_match << ','
           << s.bleu << '\n';
    }
    return os.str();
}

EvalReport evaluate(const CalibrationSet& set, const Checkpoint& ckpt, const BpeTokenizer& tok,
                    const TestExecutor* exec, const GenerationOptions& gen) {
    if (set.samples.empty()) throw Error(ErrorKind::EmptyCalibration, "no samples to evaluate");
    if (exec) {
        for (const auto& s : set.samples) {
            if (!s.tests || s.tests->empty()) throw Error(ErrorKind::MissingTests, "sample " + s.id + " has no tests");
        }
    }

    EvalReport report;
    report.samples.resize(set.samples.size());
    parallel_for(set.samples.size(), [&](std::size_t i) {
        const auto& s = set.samples[i];
        auto& v = report.samples[i];
        v.id = s.id;
        v.generated = generate_text(ckpt, tok, s.prompt, gen);
        v.exact_match = exact_match(v.generated, s.reference);
        v.bleu = bleu4(v.generated, s.reference);
        if (exec) v.passed = tests_pass(*exec, v.generated, *s.tests);
    });

    std::vector<double> em, bl, pass;
    for (const auto& v : report.samples) {
        em.push_back(v.exact_match);
        bl.push_back(v.bleu);
        if (v.passed) pass.push_back(*v.passed ? 1.0 : 0.0);
    }
    report.exact_match = mean_of(em);
    report.bleu4 = mean_of(bl);
    if (exec) report.pass_at_1 = mean_of(pass);
    return report;
}

EvalReport pass_at_1(const CalibrationSet& samples, const Checkpoint& ckpt, const BpeTokenizer& tok,
                     const TestExecutor& exec, const GenerationOptions& gen) {
    return evaluate(samples, ckpt, tok, &exec, gen);
}

std::uint64_t param_count(const TransformerConfig& c) {
    const std::uint64_t d = c.d_model;
    const std::uint64_t V = c.vocab_size;
    const std::uint64_t q = c.q_dim();
    const std::uint64_t kv = c.kv_dim();
    std::uint64_t total = V * d;
    for (std::size_t l = 0; l < c.n_layers; ++l) {
        const std::uint64_t inter = c.intermediate_size.at(l);
        total += d * q + 2 * d * kv + q * d;
        if (c.qkv_bias) total += q + 2 * kv;
        total += 3 * inter * d;
        total += 2 * d;
    }
    total += d;
    if (!c.tied_embeddings) total += d * V;
    if (c.lm_bias) total += V;
    return total;
}

double flops_per_token(const TransformerConfig& c, std::size_t context) {
    const double d = static_cast<double>(c.d_model);
    double matmul = d * static_cast<double>(c.vocab_size);  // LM head, tied or not
    for (std::size_t l = 0; l < c.n_layers; ++l) {
        const double q = static_cast<double>(c.q_dim());
        const double kv = static_cast<double>(c.kv_dim());
        matmul += d * q + 2.0 * d * kv + q * d + 3.0 * static_cast<double>(c.intermediate_size.at(l)) * d;
    }
    return 2.0 * matmul + 4.0 * static_cast<double>(c.n_layers) * static_cast<double>(context) * d;
}

std::uint64_t break_even(double one_time_cost, double per_inference_savings) {
    if (!(per_inference_savings > 0.0)) {
        throw Error(ErrorKind::ZeroSavings, "per-inference savings must be positive");
    }
    return static_cast<std::uint64_t>(std::llround(one_time_cost / per_inference_savings));
}

json EfficiencyReport::to_json() const {
    json j{
        {"dense_params", dense_params},
        {"pruned_params", pruned_params},
        {"param_delta", static_cast<std::int64_t>(dense_params) - static_cast<std::int64_t>(pruned_params)},
        {"param_reduction", param_reduction()},
        {"context", context},
        {"dense_flops_per_token", dense_flops},
        {"pruned_flops_per_token", pruned_flops},
        {"flops_saved_per_token", dense_flops - pruned_flops},
        {"flops_ratio", flops_ratio()},
    };
    if (one_time_cost) j["one_time_cost"] = *one_time_cost;
    if (break_even_runs) j["break_even_runs"] = *break_even_runs;
    return j;
}

EfficiencyReport efficiency_report(const TransformerConfig& dense, const TransformerConfig& pruned,
                                   std::size_t context, std::optional<double> one_time_cost) {
    EfficiencyReport r;
    r.dense_params = param_count(dense);
    r.pruned_params = param_count(pruned);
    r.context = context;
    r.dense_flops = flops_per_token(dense, context);
    r.pruned_flops = flops_per_token(pruned, context);
    if (one_time_cost) {
        r.one_time_cost = one_time_cost;
        r.break_even_runs = break_even(*one_time_cost, r.dense_flops - r.pruned_flops);
    }
    return r;
}

}  // namespace codeprune
