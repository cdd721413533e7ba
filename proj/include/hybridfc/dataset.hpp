#pragma once
// Labeled fact-checking assertions: (s, p, o) triples with a binary truth
// label, an optional category for per-group reporting, and a train/test
// split tag. Stored as JSON Lines.

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridfc/errors.hpp"

namespace hybridfc {

struct LabeledAssertion {
    std::string subject;
    std::string predicate;
    std::string object;
    int label = 0;  // 1 = true fact, 0 = false fact
    std::string category = "default";
    std::string split = "train";  // "train" or "test"
};

inline LabeledAssertion parse_assertion_line(const std::string& line, std::size_t lineno) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), lineno, 1);
    }
    if (!j.is_object()) throw ParseError("assertion line must be a JSON object", lineno, 1);
    LabeledAssertion a;
    for (const char* key : {"subject", "predicate", "object"}) {
        if (!j.contains(key) || !j[key].is_string())
            throw ParseError(std::string("missing or non-string field '") + key + "'", lineno, 1);
    }
    a.subject = j["subject"].get<std::string>();
    a.predicate = j["predicate"].get<std::string>();
    a.object = j["object"].get<std::string>();
    if (!j.contains("label")) throw ParseError("missing field 'label'", lineno, 1);
    if (j["label"].is_boolean()) {
        a.label = j["label"].get<bool>() ? 1 : 0;
    } else if (j["label"].is_number_integer()) {
        int v = j["label"].get<int>();
        if (v != 0 && v != 1) throw ParseError("label must be 0, 1, true, or false", lineno, 1);
        a.label = v;
    } else {
        throw ParseError("label must be 0, 1, true, or false", lineno, 1);
    }
    if (j.contains("category")) {
        if (!j["category"].is_string()) throw ParseError("category must be a string", lineno, 1);
        a.category = j["category"].get<std::string>();
    }
    if (j.contains("split")) {
        if (!j["split"].is_string()) throw ParseError("split must be a string", lineno, 1);
        a.split = j["split"].get<std::string>();
        if (a.split != "train" && a.split != "test")
            throw ParseError("split must be 'train' or 'test', got '" + a.split + "'", lineno, 1);
    }
    return a;
}

inline std::vector<LabeledAssertion> load_assertions_jsonl(std::istream& in) {
    std::vector<LabeledAssertion> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        out.push_back(parse_assertion_line(line, lineno));
    }
    return out;
}

inline std::vector<LabeledAssertion> load_assertions_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open assertions file: " + path);
    return load_assertions_jsonl(in);
}

inline void save_assertions_jsonl(const std::vector<LabeledAssertion>& assertions,
                                  std::ostream& out) {
    for (const auto& a : assertions) {
        nlohmann::json j;
        j["subject"] = a.subject;
        j["predicate"] = a.predicate;
        j["object"] = a.object;
        j["label"] = a.label;
        j["category"] = a.category;
        j["split"] = a.split;
        out << j.dump() << '\n';
    }
}

inline void save_assertions_jsonl(const std::vector<LabeledAssertion>& assertions,
                                  const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open assertions file for writing: " + path);
    save_assertions_jsonl(assertions, out);
}

struct DatasetStats {
    std::size_t total = 0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    std::map<std::string, std::pair<std::size_t, std::size_t>> by_category;  // (pos, neg)
    std::map<std::string, std::size_t> by_split;
};

inline DatasetStats dataset_stats(const std::vector<LabeledAssertion>& assertions) {
    DatasetStats s;
    s.total = assertions.size();
    for (const auto& a : assertions) {
        if (a.label == 1) {
            ++s.positives;
            ++s.by_category[a.category].first;
        } else {
            ++s.negatives;
            ++s.by_category[a.category].second;
        }
        ++s.by_split[a.split];
    }
    return s;
}

inline std::vector<LabeledAssertion> filter_split(const std::vector<LabeledAssertion>& assertions,
                                                  const std::string& split) {
    if (split == "all") return assertions;
    std::vector<LabeledAssertion> out;
    for (const auto& a : assertions)
        if (a.split == split) out.push_back(a);
    return out;
}

}  // namespace hybridfc
