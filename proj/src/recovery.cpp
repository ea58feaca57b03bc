// Copyright 2026 The codeprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "codeprune/recovery.hpp"

#include <fstream>

#include <json.hpp>

#include "codeprune/error.hpp"
#include "codeprune/parallel.hpp"

namespace codeprune {

using nlohmann::json;

std::string recovery_sample_to_line(const RecoverySample& s) {
    json tests = json::array();
    for (const auto& t : s.tests) tests.push_back({{"input", t.input}, {"expected", t.expected}});
    json j = {{"id", s.id}, {"prompt", s.prompt}, {"target", s.target}, {"tests", tests}, {"replaced", s.replaced}};
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

RecoverySample recovery_sample_from_line(const std::string& line) {
    try {
        const json j = json::parse(line);
        RecoverySample s;
        s.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
        s.prompt = j.at("prompt").get<std::string>();
        s.target = j.at("target").get<std::string>();
        if (j.contains("tests")) {
            for (const auto& t : j.at("tests")) {
                s.tests.push_back({t.at("input").get<std::string>(), t.at("expected").get<std::string>()});
            }
        }
        s.replaced = j.value("replaced", false);
        return s;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::BadFormat, std::string("recovery sample: ") + e.what());
    }
}

std::vector<RecoverySample> load_recovery_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path);
    std::vector<RecoverySample> out;
    std::size_t lineno = 0;
    for (std::string line; std::getline(in, line);) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(recovery_sample_from_line(line));
        } catch (const Error& e) {
            throw Error(ErrorKind::BadFormat, path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void save_recovery_dataset(const std::vector<RecoverySample>& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path + " for writing");
    for (const auto& s : data) out << recovery_sample_to_line(s) << '\n';
    if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path);
}

std::vector<RecoverySample> build_recovery_dataset(const std::vector<RecoverySample>& data, const Checkpoint& original,
                                                   const BpeTokenizer& tok, const TestExecutor& exec,
                                                   const GenerationOptions& gen) {
    require_valid(original);
    std::vector<RecoverySample> out = data;
    parallel_for(data.size(), [&](std::size_t i) {
        const auto& s = data[i];
        if (s.tests.empty()) return;
        std::string code = generate_text(original, tok, s.prompt, gen);
        if (tests_pass(exec, code, s.tests)) {
            out[i].target = std::move(code);
            out[i].replaced = true;
        }
    });
    return out;
}

std::vector<std::string> reverify_replaced(const std::vector<RecoverySample>& data, const TestExecutor& exec) {
    std::vector<char> bad(data.size(), 0);
    parallel_for(data.size(), [&](std::size_t i) {
        if (data[i].replaced && !tests_pass(exec, data[i].target, data[i].tests)) bad[i] = 1;
    });
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (bad[i]) ids.push_back(data[i].id);
    }
    return ids;
}

}  // namespace codeprune
