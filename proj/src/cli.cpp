// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "codeprune/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "codeprune/checkpoint.hpp"
#include "codeprune/error.hpp"
#include "codeprune/executor.hpp"
#include "codeprune/metrics.hpp"
#include "codeprune/objective.hpp"
#include "codeprune/parallel.hpp"
#include "codeprune/pruner.hpp"
#include "codeprune/recovery.hpp"
#include "codeprune/tokenizer.hpp"

namespace codeprune {

using nlohmann::json;

namespace {

struct RunConfig {
    std::string model, tokenizer, calib, data, dense, pruned;
    std::vector<std::string> corpus;
    std::string out_model, out_tokenizer, plan_out, report_out, out, csv_out;
    std::size_t k_layers = 0;
    std::size_t ffn_remove = 0;
    std::string criterion = "kl";
    std::uint64_t seed = 0;
    std::size_t frequency_threshold = 0;
    std::size_t max_new = 512;
    std::vector<std::string> stop_tokens;
    std::string executor;
    double timeout = 10.0;
    std::vector<std::string> env_allow;
    unsigned jobs = 0;
    bool pre_verified = false;
    std::size_t context = 1024;
    std::optional<std::size_t> vocab_size;
    std::optional<double> one_time_cost;
};

// Appends options from a JSON defaults file unless the command line already
// sets them. Keys use option names with '_' or '-'; a nested object keyed by the
// subcommand name overrides top-level keys.
std::vector<std::string> merge_config_file(std::vector<std::string> args) {
    auto it = std::find(args.begin(), args.end(), "--config");
    if (it == args.end() || std::next(it) == args.end()) return args;
    const std::string path = *std::next(it);
    args.erase(it, it + 2);

    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open config " + path);
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::BadFormat, "config " + path + ": " + e.what());
    }
    if (!cfg.is_object()) throw Error(ErrorKind::BadFormat, "config must be a JSON object");

    static const std::set<std::string> subcommands = {"inspect",      "prune-vocab", "prune-layers",
                                                      "prune-ffn",    "prune",       "score-layers",
                                                      "eval",         "build-recovery", "report-efficiency"};
    const auto sub = std::find_if(args.begin(), args.end(), [](const std::string& a) { return subcommands.count(a); });
    json merged = json::object();
    for (const auto& [k, v] : cfg.items()) {
        if (!v.is_object()) merged[k] = v;
    }
    if (sub != args.end() && cfg.contains(*sub) && cfg[*sub].is_object()) {
        for (const auto& [k, v] : cfg[*sub].items()) merged[k] = v;
    }

    auto present = [&](const std::string& flag) {
        return std::any_of(args.begin(), args.end(),
                           [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    for (const auto& [k, v] : merged.items()) {
        std::string flag = "--" + k;
        std::replace(flag.begin(), flag.end(), '_', '-');
        if (present(flag)) continue;
        if (v.is_boolean()) {
            if (v.get<bool>()) args.push_back(flag);
        } else if (v.is_array()) {
            for (const auto& e : v) {
                args.push_back(flag);
                args.push_back(scalar(e));
            }
        } else {
            args.push_back(flag);
            args.push_back(scalar(v));
        }
    }
    return args;
}

std::vector<Bytes> read_corpus(const std::vector<std::string>& files) {
    std::vector<Bytes> docs;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        if (!in) throw Error(ErrorKind::IoFailure, "cannot open corpus file " + f);
        for (std::string line; std::getline(in, line);) docs.push_back(line);
    }
    return docs;
}

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
    if (path.empty() || path == "-") {
        fallback << text;
        return;
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw Error(ErrorKind::IoFailure, "cannot open " + path + " for writing");
    f << text;
    if (!f) throw Error(ErrorKind::IoFailure, "write failed for " + path);
}

std::string dump(const json& j) { return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n"; }

GenerationOptions generation_options(const RunConfig& rc, const BpeTokenizer& tok) {
    GenerationOptions g;
    g.max_new = rc.max_new;
    if (!rc.stop_tokens.empty()) {
        std::set<TokenId> ids = special_token_ids(tok);
        for (const auto& t : rc.stop_tokens) {
            const std::string bytes = t == "\\n" ? std::string("\n") : t;
            if (auto id = tok.find(bytes)) {
                ids.insert(*id);
            } else if (auto sp = tok.special_tokens().find(t); sp != tok.special_tokens().end()) {
                ids.insert(sp->second);
            } else {
                throw Error(ErrorKind::BadFormat, "stop token not in vocabulary: " + t);
            }
        }
        g.stop_ids = ids;
    }
    return g;
}

std::unique_ptr<ProcessExecutor> make_executor(const RunConfig& rc) {
    if (rc.executor.empty()) return nullptr;
    ProcessExecutor::Options o;
    o.command = rc.executor;
    o.timeout_seconds = rc.timeout;
    if (!rc.env_allow.empty()) o.env_allowlist = rc.env_allow;
    return std::make_unique<ProcessExecutor>(o);
}

// Config from either a PFC1 checkpoint or a JSON file holding a config object.
TransformerConfig load_any_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() == 4 && std::string(magic, 4) == "PFC1") return load_checkpoint(path).config;
    in.clear();
    in.seekg(0);
    try {
        json j = json::parse(in);
        auto c = config_from_json(j.contains("config") ? j.at("config") : j);
        if (auto v = validate_config(c); !v.empty()) throw Error(ErrorKind::InvalidCheckpoint, v.front());
        return c;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::BadFormat, path + ": " + e.what());
    }
}

void log_line(std::ostream& err, const std::string& msg) { err << "[codeprune] " << msg << '\n'; }

void write_plan(const RunConfig& rc, const PrunePlan& plan) {
    if (!rc.plan_out.empty()) {
        std::ofstream dummy;
        write_text(rc.plan_out, dump(plan_to_json(plan)), dummy);
    }
}

int do_inspect(const RunConfig& rc, std::ostream& out) {
    const auto ckpt = load_checkpoint(rc.model);
    write_text(rc.out, dump(describe_checkpoint(ckpt)), out);
    return kExitOk;
}

int do_prune_vocab(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    const auto ckpt = load_checkpoint(rc.model);
    const auto tok = load_tokenizer(rc.tokenizer);
    const auto corpus = read_corpus(rc.corpus);
    const auto tokens = collect_tokens(corpus, tok, rc.frequency_threshold);
    auto [pruned_tok, remap] = prune_tokenizer(tok, tokens);
    const auto pruned = apply_vocab_plan(ckpt, remap);
    save_checkpoint(pruned, rc.out_model);
    save_tokenizer(pruned_tok, rc.out_tokenizer);
    log_line(err, "vocabulary " + std::to_string(tok.size()) + " -> " + std::to_string(pruned_tok.size()));

    PrunePlan plan;
    plan.kept_token_old_ids = remap.kept_old_ids;
    write_plan(rc, plan);
    write_text(rc.out, dump({{"vocab_before", tok.size()},
                             {"vocab_after", pruned_tok.size()},
                             {"merges_before", tok.merges().size()},
                             {"merges_after", pruned_tok.merges().size()},
                             {"parameters_before", tensor_param_count(ckpt)},
                             {"parameters_after", tensor_param_count(pruned)}}),
               out);
    return kExitOk;
}

CalibrationSet scoring_set(const RunConfig& rc, const Checkpoint& ckpt, const BpeTokenizer& tok, std::ostream& err) {
    auto calib = load_calibration_set(rc.calib).bound_to(tok);
    if (rc.pre_verified) return calib;
    auto exec = make_executor(rc);
    if (!exec) throw Error(ErrorKind::ExecutorUnavailable, "--executor is required unless --pre-verified is set");
    auto filtered = filter_correct_samples(calib, ckpt, tok, *exec, {generation_options(rc, tok)});
    log_line(err, "calibration samples kept after filtering: " + std::to_string(filtered.samples.size()) + " of " +
                      std::to_string(calib.samples.size()));
    return filtered;
}

int do_prune_layers(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    const auto ckpt = load_checkpoint(rc.model);
    const auto tok = load_tokenizer(rc.tokenizer);
    const auto calib = scoring_set(rc, ckpt, tok, err);
    const auto result = prune_layers(ckpt, calib, tok, rc.k_layers, parse_criterion(rc.criterion));
    save_checkpoint(result.ckpt, rc.out_model);

    PrunePlan plan;
    plan.kept_token_old_ids = IdRemap::identity(ckpt.config.vocab_size).kept_old_ids;
    json trace = json::array();
    for (const auto& s : result.trace) {
        plan.removed_layers.push_back(s.original_index);
        plan.removed_layers_current.push_back(s.current_index);
        trace.push_back({{"original_index", s.original_index}, {"current_index", s.current_index}, {"score", s.score}});
        log_line(err, "removed layer " + std::to_string(s.original_index) + " (score " + std::to_string(s.score) + ")");
    }
    write_plan(rc, plan);
    write_text(rc.out, dump({{"criterion", rc.criterion}, {"trace", trace}}), out);
    return kExitOk;
}

int do_prune_ffn(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    const auto ckpt = load_checkpoint(rc.model);
    const auto tok = load_tokenizer(rc.tokenizer);
    const auto calib = load_calibration_set(rc.calib).bound_to(tok);
    std::vector<std::size_t> keep;
    for (std::size_t inter : ckpt.config.intermediate_size) {
        if (rc.ffn_remove >= inter) throw Error(ErrorKind::BadK, "--ffn-remove must be below every intermediate size");
        keep.push_back(inter - rc.ffn_remove);
    }
    const auto sel = select_ffn_rule(ckpt, calib, tok, keep, rc.seed);
    save_checkpoint(sel.ckpt, rc.out_model);
    log_line(err, "FFN rule " + std::string(ffn_rule_name(sel.rule)));

    PrunePlan plan;
    plan.kept_token_old_ids = IdRemap::identity(ckpt.config.vocab_size).kept_old_ids;
    plan.ffn_rule = sel.rule;
    plan.ffn_kept_indices = sel.kept;
    plan.seed = rc.seed;
    write_plan(rc, plan);
    json scores = json::object();
    for (std::size_t r = 0; r < kFfnRules.size(); ++r) scores[std::string(ffn_rule_name(kFfnRules[r]))] = sel.scores[r];
    write_text(rc.out, dump({{"rule", ffn_rule_name(sel.rule)}, {"scores", scores}}), out);
    return kExitOk;
}

int do_prune(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    const auto ckpt = load_checkpoint(rc.model);
    const auto tok = load_tokenizer(rc.tokenizer);
    const auto corpus = read_corpus(rc.corpus);
    const auto calib = load_calibration_set(rc.calib);
    auto exec = rc.pre_verified ? nullptr : make_executor(rc);

    PipelineOptions opts;
    opts.k_layers = rc.k_layers;
    opts.ffn_remove = rc.ffn_remove;
    opts.criterion = parse_criterion(rc.criterion);
    opts.seed = rc.seed;
    opts.frequency_threshold = rc.frequency_threshold;
    opts.pre_verified = rc.pre_verified;
    opts.executor = exec.get();
    opts.generation = generation_options(rc, tok);
    const auto result = prune_pipeline(ckpt, tok, corpus, calib, opts);

    save_checkpoint(result.ckpt, rc.out_model);
    save_tokenizer(result.tokenizer, rc.out_tokenizer);
    write_plan(rc, result.plan);
    log_line(err, "parameters " + std::to_string(tensor_param_count(ckpt)) + " -> " +
                      std::to_string(tensor_param_count(result.ckpt)));
    write_text(rc.report_out.empty() ? rc.out : rc.report_out, dump(result.report), out);
    return kExitOk;
}

int do_score_layers(const RunConfig& rc, std::ostream& out) {
    const auto ckpt = load_checkpoint(rc.model);
    const auto tok = load_tokenizer(rc.tokenizer);
    const auto calib = load_calibration_set(rc.calib).bound_to(tok);
    const auto criterion = parse_criterion(rc.criterion);
    const auto encoded = encode_calibration(calib, tok);
    LayerScoreReport report;
    if (ckpt.layers.size() >= 2) {
        BaselineDistributions baseline;
        if (criterion == Criterion::Kl) baseline = compute_baseline(ckpt, encoded);
        report = find_best_layer(ckpt, encoded, baseline, criterion).report;
    } else {
        report.entries.push_back({0, layer_score(ckpt, 0, calib, tok, criterion), criterion});
    }
    write_text(rc.out, report.to_csv(), out);
    return kExitOk;
}

int do_eval(const RunConfig& rc, std::ostream& out) {
    const auto ckpt = load_checkpoint(rc.model);
    const auto tok = load_tokenizer(rc.tokenizer);
    const auto data = load_calibration_set(rc.data);
    auto exec = make_executor(rc);
    const auto report = evaluate(data, ckpt, tok, exec.get(), generation_options(rc, tok));
    if (!rc.csv_out.empty()) write_text(rc.csv_out, report.to_csv(), out);
    write_text(rc.out, dump(report.to_json()), out);
    return kExitOk;
}

int do_build_recovery(const RunConfig& rc, std::ostream& out, std::ostream& err) {
    const auto ckpt = load_checkpoint(rc.model);
    const auto tok = load_tokenizer(rc.tokenizer);
    const auto data = load_recovery_dataset(rc.data);
    auto exec = make_executor(rc);
    if (!exec) throw Error(ErrorKind::ExecutorUnavailable, "--executor is required");
    const auto updated = build_recovery_dataset(data, ckpt, tok, *exec, generation_options(rc, tok));
    save_recovery_dataset(updated, rc.out);
    std::size_t replaced = 0;
    for (std::size_t i = 0; i < updated.size(); ++i) {
        if (updated[i].replaced && !data[i].replaced) ++replaced;
    }
    log_line(err, "replaced " + std::to_string(replaced) + " of " + std::to_string(updated.size()) + " targets");
    out << dump({{"samples", updated.size()}, {"replaced", replaced}});
    return kExitOk;
}

int do_report_efficiency(const RunConfig& rc, std::ostream& out) {
    const auto dense = load_any_config(rc.dense);
    TransformerConfig pruned;
    if (!rc.pruned.empty()) {
        pruned = load_any_config(rc.pruned);
    } else {
        pruned = project_config(dense, rc.vocab_size.value_or(dense.vocab_size), rc.k_layers, rc.ffn_remove);
    }
    const auto report = efficiency_report(dense, pruned, rc.context, rc.one_time_cost);
    write_text(rc.out, dump(report.to_json()), out);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    auto error_line = [&](std::string_view kind, const std::string& msg) {
        err << json{{"error", kind}, {"message", msg}}.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    };

    std::vector<std::string> args;
    try {
        args = merge_config_file(raw_args);
    } catch (const Error& e) {
        error_line(error_kind_name(e.kind()), e.what());
        return is_io_error(e.kind()) ? kExitIo : kExitValidation;
    }

    RunConfig rc;
    CLI::App app{"Structural pruning toolkit for decoder-only transformer checkpoints", "codeprune"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--jobs", rc.jobs, "Worker cap for scoring and test execution (0 = all cores)");
    app.add_option("--config", "JSON file with flag defaults (flags on the command line win)")->type_name("FILE");

    auto model_opt = [&](CLI::App* sc, const char* help = "Input checkpoint (PFC1)") {
        sc->add_option("--model", rc.model, help)->required();
    };
    auto tok_opt = [&](CLI::App* sc) { sc->add_option("--tokenizer", rc.tokenizer, "Tokenizer JSON")->required(); };
    auto out_opt = [&](CLI::App* sc) { sc->add_option("--out", rc.out, "Write the JSON report here (default stdout)"); };
    auto gen_opts = [&](CLI::App* sc) {
        sc->add_option("--max-new", rc.max_new, "Maximum generated tokens per sample")->capture_default_str();
        sc->add_option("--stop-token", rc.stop_tokens, "Extra stop token (byte text, special name, or \\n)");
    };
    auto exec_opts = [&](CLI::App* sc) {
        sc->add_option("--executor", rc.executor, "Test executor command; invoked as <command> --timeout <s>");
        sc->add_option("--timeout", rc.timeout, "Per-test timeout in seconds")->capture_default_str()->check(
            CLI::PositiveNumber);
        sc->add_option("--env-allow", rc.env_allow, "Environment variable passed to the executor (repeatable)");
    };
    auto criterion_opt = [&](CLI::App* sc) {
        sc->add_option("--criterion", rc.criterion, "Layer scoring criterion")
            ->check(CLI::IsMember({"kl", "cosine", "angular", "perplexity"}))
            ->capture_default_str();
    };

    auto* inspect = app.add_subcommand("inspect", "Print config, tensor shapes and parameter count as JSON");
    model_opt(inspect);
    out_opt(inspect);

    auto* pv = app.add_subcommand("prune-vocab", "Prune tokenizer and embeddings to the tokens a corpus uses");
    model_opt(pv);
    tok_opt(pv);
    pv->add_option("--corpus", rc.corpus, "Newline-delimited corpus files")->required();
    pv->add_option("--frequency-threshold", rc.frequency_threshold, "Keep tokens seen more than this many times")
        ->capture_default_str();
    pv->add_option("--out-model", rc.out_model, "Output checkpoint")->required();
    pv->add_option("--out-tokenizer", rc.out_tokenizer, "Output tokenizer")->required();
    pv->add_option("--plan-out", rc.plan_out, "Write the prune plan JSON here");
    out_opt(pv);

    auto* pl = app.add_subcommand("prune-layers", "Iteratively remove the k most redundant layers");
    model_opt(pl);
    tok_opt(pl);
    pl->add_option("--calib", rc.calib, "Calibration set (JSON lines)")->required();
    pl->add_option("--k-layers", rc.k_layers, "Number of layers to remove")->required();
    criterion_opt(pl);
    pl->add_option("--out-model", rc.out_model, "Output checkpoint")->required();
    pl->add_option("--plan-out", rc.plan_out, "Write the prune plan JSON here");
    pl->add_flag("--pre-verified", rc.pre_verified, "Trust calibration references; skip execution filtering");
    exec_opts(pl);
    gen_opts(pl);
    out_opt(pl);

    auto* pf = app.add_subcommand("prune-ffn", "Remove FFN neurons with the best of the four keep rules");
    model_opt(pf);
    tok_opt(pf);
    pf->add_option("--calib", rc.calib, "Calibration set (JSON lines)")->required();
    pf->add_option("--ffn-remove", rc.ffn_remove, "Neurons removed per layer")->required();
    pf->add_option("--seed", rc.seed, "Seed for the random rule")->capture_default_str();
    pf->add_option("--out-model", rc.out_model, "Output checkpoint")->required();
    pf->add_option("--plan-out", rc.plan_out, "Write the prune plan JSON here");
    out_opt(pf);

    auto* pr = app.add_subcommand("prune", "Full pipeline: vocabulary, then layers, then FFN");
    model_opt(pr);
    tok_opt(pr);
    pr->add_option("--corpus", rc.corpus, "Newline-delimited corpus files for vocabulary pruning")->required();
    pr->add_option("--calib", rc.calib, "Calibration set (JSON lines)")->required();
    pr->add_option("--k-layers", rc.k_layers, "Number of layers to remove")->capture_default_str();
    pr->add_option("--ffn-remove", rc.ffn_remove, "Neurons removed per layer")->capture_default_str();
    criterion_opt(pr);
    pr->add_option("--seed", rc.seed, "Seed for the random FFN rule")->capture_default_str();
    pr->add_option("--frequency-threshold", rc.frequency_threshold, "Keep tokens seen more than this many times")
        ->capture_default_str();
    pr->add_option("--out-model", rc.out_model, "Output checkpoint")->required();
    pr->add_option("--out-tokenizer", rc.out_tokenizer, "Output tokenizer")->required();
    pr->add_option("--plan-out", rc.plan_out, "Write the prune plan JSON here");
    pr->add_option("--report-out", rc.report_out, "Write the pipeline report here (default stdout)");
    pr->add_flag("--pre-verified", rc.pre_verified, "Trust calibration references; skip execution filtering");
    exec_opts(pr);
    gen_opts(pr);
    out_opt(pr);

    auto* sl = app.add_subcommand("score-layers", "Score every layer under one criterion (CSV)");
    model_opt(sl);
    tok_opt(sl);
    sl->add_option("--calib", rc.calib, "Calibration set (JSON lines)")->required();
    criterion_opt(sl);
    sl->add_option("--out", rc.out, "Write CSV here (default stdout)");

    auto* ev = app.add_subcommand("eval", "Greedy-decode a dataset and report Pass@1, EM and BLEU-4");
    model_opt(ev);
    tok_opt(ev);
    ev->add_option("--data", rc.data, "Samples (JSON lines with prompt, reference, tests)")->required();
    ev->add_option("--csv", rc.csv_out, "Per-sample verdicts as CSV");
    exec_opts(ev);
    gen_opts(ev);
    out_opt(ev);

    auto* br = app.add_subcommand("build-recovery", "Replace targets with verified original-model generations");
    model_opt(br, "Original (unpruned) checkpoint");
    tok_opt(br);
    br->add_option("--data", rc.data, "Recovery dataset (JSON lines)")->required();
    br->add_option("--out", rc.out, "Output dataset (JSON lines)")->required();
    exec_opts(br);
    gen_opts(br);

    auto* re = app.add_subcommand("report-efficiency", "Parameter, FLOPs and break-even report");
    re->add_option("--dense", rc.dense, "Dense checkpoint or config JSON")->required();
    re->add_option("--pruned", rc.pruned, "Pruned checkpoint or config JSON");
    re->add_option("--vocab-size", rc.vocab_size, "Projected vocabulary size when --pruned is absent");
    re->add_option("--k-layers", rc.k_layers, "Projected layer removals when --pruned is absent");
    re->add_option("--ffn-remove", rc.ffn_remove, "Projected neurons removed per layer when --pruned is absent");
    re->add_option("--context", rc.context, "Context length for the attention FLOPs term")->capture_default_str();
    re->add_option("--one-time-cost", rc.one_time_cost, "One-time pruning cost in FLOPs (enables break-even)");
    out_opt(re);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        error_line("Usage", e.what());
        CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return kExitUsage;
    }

    set_worker_count(rc.jobs);
    try {
        if (*inspect) return do_inspect(rc, out);
        if (*pv) return do_prune_vocab(rc, out, err);
        if (*pl) return do_prune_layers(rc, out, err);
        if (*pf) return do_prune_ffn(rc, out, err);
        if (*pr) return do_prune(rc, out, err);
        if (*sl) return do_score_layers(rc, out);
        if (*ev) return do_eval(rc, out);
        if (*br) return do_build_recovery(rc, out, err);
        if (*re) return do_report_efficiency(rc, out);
    } catch (const Error& e) {
        error_line(error_kind_name(e.kind()), e.what());
        return is_io_error(e.kind()) ? kExitIo : kExitValidation;
    } catch (const json::exception& e) {
        error_line("BadFormat", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        error_line("Internal", e.what());
        return kExitValidation;
    }
    return kExitUsage;
}

}  // namespace codeprune
