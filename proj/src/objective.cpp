// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "codeprune/objective.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "codeprune/error.hpp"
#include "codeprune/parallel.hpp"

namespace codeprune {

using nlohmann::json;

CalibrationSet CalibrationSet::bound_to(const BpeTokenizer& tok) const {
    CalibrationSet out = *this;
    out.tokenizer_fingerprint = tok.fingerprint();
    return out;
}

CalibrationSample calibration_sample_from_json(const json& j) {
    CalibrationSample s;
    try {
        s.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
        j.at("prompt").get_to(s.prompt);
        s.reference = j.value("reference", std::string());
        if (j.contains("tests") && !j.at("tests").is_null()) {
            std::vector<TestCase> tests;
            for (const auto& t : j.at("tests")) {
                tests.push_back({t.at("input").get<std::string>(), t.at("expected").get<std::string>()});
            }
            s.tests = std::move(tests);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::BadFormat, std::string("calibration sample: ") + e.what());
    }
    if (s.prompt.empty()) throw Error(ErrorKind::BadFormat, "calibration sample " + s.id + " has an empty prompt");
    return s;
}

json calibration_sample_to_json(const CalibrationSample& s) {
    json j{{"id", s.id}, {"prompt", s.prompt}, {"reference", s.reference}};
    if (s.tests) {
        json tests = json::array();
        for (const auto& t : *s.tests) tests.push_back({{"input", t.input}, {"expected", t.expected}});
        j["tests"] = tests;
    }
    return j;
}

CalibrationSet load_calibration_set(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
    CalibrationSet set;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::BadFormat, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        set.samples.push_back(calibration_sample_from_json(j));
    }
    return set;
}

void save_calibration_set(const CalibrationSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
    for (const auto& s : set.samples) {
        out << calibration_sample_to_json(s).dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    }
}

std::vector<EncodedSample> encode_calibration(const CalibrationSet& calib, const BpeTokenizer& tok) {
    if (calib.samples.empty()) throw Error(ErrorKind::EmptyCalibration, "calibration set is empty");
    if (calib.tokenizer_fingerprint && *calib.tokenizer_fingerprint != tok.fingerprint()) {
        throw Error(ErrorKind::FingerprintMismatch, "calibration set is bound to a different tokenizer");
    }
    std::vector<EncodedSample> out;
    out.reserve(calib.samples.size());
    for (const auto& s : calib.samples) out.push_back({tok.encode(s.prompt), tok.encode(s.reference)});
    return out;
}

TokenIds teacher_forced_input(const EncodedSample& s) {
    TokenIds input = s.prompt;
    if (!s.reference.empty()) input.insert(input.end(), s.reference.begin(), s.reference.end() - 1);
    return input;
}

double kl_divergence(const Distribution& p, const Distribution& q) {
    if (p.size() != q.size()) {
        throw Error(ErrorKind::LengthMismatch,
                    "distributions of length " + std::to_string(p.size()) + " and " + std::to_string(q.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = p.probs[i];
        if (pi <= 0.0) continue;
        sum += pi * std::log(pi / std::max(q.probs[i], kKlEpsilon));
    }
    return sum;
}

BaselineDistributions compute_baseline(const Checkpoint& ckpt, const std::vector<EncodedSample>& encoded,
                                       const ForwardOptions& opts) {
    BaselineDistributions out(encoded.size());
    parallel_for(encoded.size(), [&](std::size_t i) {
        out[i] = teacher_forced_distributions(ckpt, encoded[i].prompt, encoded[i].reference, opts);
    });
    return out;
}

double mean_kl_against(const BaselineDistributions& baseline, const Checkpoint& candidate,
                       const std::vector<EncodedSample>& encoded, const ForwardOptions& opts) {
    if (encoded.empty()) throw Error(ErrorKind::EmptyCalibration, "calibration set is empty");
    if (baseline.size() != encoded.size()) {
        throw Error(ErrorKind::LengthMismatch, "baseline does not cover the calibration set");
    }
    if (!baseline.empty() && !baseline.front().empty() &&
        baseline.front().front().size() != candidate.config.vocab_size) {
        throw Error(ErrorKind::VocabMismatch, "baseline and candidate vocabularies differ");
    }

    std::vector<std::vector<double>> per_sample(encoded.size());
    parallel_for(encoded.size(), [&](std::size_t i) {
        const auto dists = teacher_forced_distributions(candidate, encoded[i].prompt, encoded[i].reference, opts);
        per_sample[i].reserve(dists.size());
        for (std::size_t k = 0; k < dists.size(); ++k) per_sample[i].push_back(kl_divergence(baseline[i][k], dists[k]));
    });

    std::vector<double> flat;
    for (const auto& v : per_sample) flat.insert(flat.end(), v.begin(), v.end());
    if (flat.empty()) throw Error(ErrorKind::EmptyCalibration, "calibration set has no reference positions");
    return pairwise_sum(flat) / static_cast<double>(flat.size());
}

double mean_calibration_kl(const Checkpoint& original, const Checkpoint& candidate, const CalibrationSet& calib,
                           const BpeTokenizer& tok) {
    if (original.config.vocab_size != candidate.config.vocab_size) {
        throw Error(ErrorKind::VocabMismatch, "original has " + std::to_string(original.config.vocab_size) +
                                                  " tokens, candidate " +
                                                  std::to_string(candidate.config.vocab_size));
    }
    const auto encoded = encode_calibration(calib, tok);
    return mean_kl_against(compute_baseline(original, encoded), candidate, encoded);
}

std::string_view criterion_name(Criterion c) {
    switch (c) {
        case Criterion::Kl: return "kl";
        case Criterion::Cosine: return "cosine";
        case Criterion::Angular: return "angular";
        case Criterion::Perplexity: return "perplexity";
    }
    return "?";
}

Criterion parse_criterion(std::string_view name) {
    if (name == "kl") return Criterion::Kl;
    if (name == "cosine") return Criterion::Cosine;
    if (name == "angular") return Criterion::Angular;
    if (name == "perplexity") return Criterion::Perplexity;
    throw Error(ErrorKind::BadFormat, "unknown criterion " + std::string(name));
}

bool higher_is_more_redundant(Criterion c) { return c == Criterion::Cosine; }

double perplexity(const Checkpoint& ckpt, const std::vector<EncodedSample>& encoded, const ForwardOptions& opts) {
    std::vector<std::vector<double>> nll(encoded.size());
    parallel_for(encoded.size(), [&](std::size_t i) {
        const auto dists = teacher_forced_distributions(ckpt, encoded[i].prompt, encoded[i].reference, opts);
        for (std::size_t k = 0; k < dists.size(); ++k) {
            nll[i].push_back(-std::log(std::max(dists[k].probs[encoded[i].reference[k]], kKlEpsilon)));
        }
    });
    std::vector<double> flat;
    for (const auto& v : nll) flat.insert(flat.end(), v.begin(), v.end());
    if (flat.empty()) throw Error(ErrorKind::EmptyCalibration, "calibration set has no reference tokens");
    return std::exp(pairwise_sum(flat) / static_cast<double>(flat.size()));
}

LayerSimilarity layer_similarity(const Checkpoint& ckpt, const std::vector<EncodedSample>& encoded) {
    const std::size_t L = ckpt.layers.size();
    // [sample][layer] -> per-position cosines
    std::vector<std::vector<std::vector<double>>> cos(encoded.size());
    parallel_for(encoded.size(), [&](std::size_t i) {
        std::vector<Matrix> states;
        ForwardOptions opts;
        opts.layer_states = &states;
        forward_logits(ckpt, teacher_forced_input(encoded[i]), opts);
        cos[i].resize(L);
        for (std::size_t l = 0; l < L; ++l) {
            const Matrix& a = states[l];
            const Matrix& b = states[l + 1];
            for (std::size_t t = 0; t < a.rows; ++t) {
                double dot = 0.0, na = 0.0, nb = 0.0;
                for (std::size_t j = 0; j < a.cols; ++j) {
                    const double x = a.at(t, j), y = b.at(t, j);
                    dot += x * y;
                    na += x * x;
                    nb += y * y;
                }
                const double denom = std::sqrt(na) * std::sqrt(nb);
                cos[i][l].push_back(denom > 0.0 ? std::clamp(dot / denom, -1.0, 1.0) : 1.0);
            }
        }
    });

    LayerSimilarity out;
    for (std::size_t l = 0; l < L; ++l) {
        std::vector<double> c, a;
        for (const auto& sample : cos) {
            for (double v : sample[l]) {
                c.push_back(v);
                a.push_back(std::acos(v) / std::numbers::pi);
            }
        }
        out.cosine.push_back(pairwise_sum(c) / static_cast<double>(c.size()));
        out.angular.push_back(pairwise_sum(a) / static_cast<double>(a.size()));
    }
    return out;
}

double layer_score(const Checkpoint& ckpt, std::size_t layer, const CalibrationSet& calib, const BpeTokenizer& tok,
                   Criterion criterion) {
    if (layer >= ckpt.layers.size()) {
        throw Error(ErrorKind::BadLayerIndex, "layer " + std::to_string(layer) + " of " +
                                                  std::to_string(ckpt.layers.size()));
    }
    const auto encoded = encode_calibration(calib, tok);
    ForwardOptions skip;
    skip.skip_layer = layer;
    switch (criterion) {
        case Criterion::Cosine: return layer_similarity(ckpt, encoded).cosine[layer];
        case Criterion::Angular: return layer_similarity(ckpt, encoded).angular[layer];
        case Criterion::Perplexity: return perplexity(ckpt, encoded, skip);
        case Criterion::Kl: return mean_kl_against(compute_baseline(ckpt, encoded), ckpt, encoded, skip);
    }
    return 0.0;
}

}  // namespace codeprune
