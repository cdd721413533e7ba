#pragma once
// Pipeline-wide configuration: one struct covering all channel, embedding,
// and ensemble hyperparameters; a small TOML-subset reader (sections,
// key = value, #-comments, quoted strings, ints/floats/bools); and a stable
// FNV-1a hash over the canonical dump that every artifact embeds.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hybridfc/embedding.hpp"
#include "hybridfc/embedding_train.hpp"
#include "hybridfc/ensemble.hpp"
#include "hybridfc/errors.hpp"
#include "hybridfc/evidence.hpp"
#include "hybridfc/rng.hpp"

namespace hybridfc {

struct PipelineConfig {
    // Text channel.
    int k = 3;                // snippets per assertion
    int text_dim = 768;       // sentence-embedding width d
    int retrieval_top_n = 20;
    // Path channel.
    int path_max_length = 3;  // L
    int path_top_m = 5;       // m
    int path_budget = 1000;
    int path_min_support = 2;
    // KG embedding.
    ModelKind model_kind = ModelKind::TransE;
    int embed_dim = 100;
    int embed_epochs = 100;
    double embed_lr = 1e-3;
    int embed_negatives = 1;
    double embed_margin = 1.0;
    double embed_reg = 1e-3;
    int embed_batch = 128;
    // Ensemble.
    int text_hidden = 256;
    int text_out = 32;
    int emb_hidden = 128;
    int emb_out = 32;
    int fuse_hidden = 32;
    int fuse_out = 16;
    double dropout_keep = 0.9;
    double lr = 1e-3;
    int max_epochs = 1000;
    int validate_every = 10;
    int patience = 50;
    double min_delta = 1e-6;
    double val_fraction = 0.2;
    // Pipeline.
    std::uint64_t seed = 7;
    std::string channels = "HybridFC";
    std::string missing_embedding = "zero";

    void validate() const {
        std::vector<std::string> problems;
        auto positive = [&problems](int v, const char* name) {
            if (v <= 0) problems.push_back(std::string(name) + " must be positive");
        };
        positive(k, "text.k");
        positive(text_dim, "text.dim");
        if (retrieval_top_n < k) problems.push_back("text.top_n must be >= text.k");
        positive(path_max_length, "path.max_length");
        positive(path_top_m, "path.top_m");
        positive(path_budget, "path.budget");
        if (path_min_support < 1) problems.push_back("path.min_support must be >= 1");
        positive(embed_dim, "embedding.dim");
        positive(embed_epochs, "embedding.epochs");
        if (embed_lr <= 0.0) problems.push_back("embedding.lr must be positive");
        positive(embed_negatives, "embedding.negatives");
        if (embed_margin <= 0.0) problems.push_back("embedding.margin must be positive");
        if (embed_reg < 0.0) problems.push_back("embedding.reg must be non-negative");
        positive(embed_batch, "embedding.batch");
        positive(text_hidden, "ensemble.text_hidden");
        positive(text_out, "ensemble.text_out");
        positive(emb_hidden, "ensemble.emb_hidden");
        positive(emb_out, "ensemble.emb_out");
        positive(fuse_hidden, "ensemble.fuse_hidden");
        positive(fuse_out, "ensemble.fuse_out");
        if (dropout_keep <= 0.0 || dropout_keep > 1.0)
            problems.push_back("ensemble.dropout_keep must lie in (0,1]");
        if (lr <= 0.0) problems.push_back("ensemble.lr must be positive");
        positive(max_epochs, "ensemble.max_epochs");
        positive(validate_every, "ensemble.validate_every");
        positive(patience, "ensemble.patience");
        if (min_delta < 0.0) problems.push_back("ensemble.min_delta must be non-negative");
        if (val_fraction <= 0.0 || val_fraction >= 1.0)
            problems.push_back("ensemble.val_fraction must lie in (0,1)");
        try {
            parse_channel_mask(channels);
        } catch (const ConfigError& e) {
            problems.push_back(e.what());
        }
        try {
            parse_missing_policy(missing_embedding);
        } catch (const ConfigError& e) {
            problems.push_back(e.what());
        }
        if (!problems.empty()) {
            std::string msg = "invalid configuration:";
            for (const auto& p : problems) msg += "\n  - " + p;
            throw ConfigError(msg);
        }
    }

    EmbeddingTrainConfig embedding_config() const {
        EmbeddingTrainConfig cfg;
        cfg.kind = model_kind;
        cfg.dim = embed_dim;
        cfg.epochs = embed_epochs;
        cfg.lr = embed_lr;
        cfg.negative_ratio = embed_negatives;
        cfg.margin = embed_margin;
        cfg.reg_weight = embed_reg;
        cfg.batch_size = embed_batch;
        cfg.seed = seed;
        return cfg;
    }

    EvidenceBuildOptions evidence_options() const {
        EvidenceBuildOptions opt;
        opt.k = k;
        opt.top_n = retrieval_top_n;
        opt.path.max_length = path_max_length;
        opt.path.top_m = path_top_m;
        opt.path.budget = static_cast<std::size_t>(path_budget);
        opt.path.min_support = static_cast<std::size_t>(path_min_support);
        opt.missing = parse_missing_policy(missing_embedding);
        return opt;
    }

    EnsembleConfig ensemble_config(int actual_text_dim, int actual_emb_dim) const {
        EnsembleConfig cfg;
        cfg.text_dim = actual_text_dim;
        cfg.emb_dim = actual_emb_dim;
        cfg.text_hidden = text_hidden;
        cfg.text_out = text_out;
        cfg.emb_hidden = emb_hidden;
        cfg.emb_out = emb_out;
        cfg.fuse_hidden = fuse_hidden;
        cfg.fuse_out = fuse_out;
        cfg.dropout_keep = dropout_keep;
        cfg.lr = lr;
        cfg.max_epochs = max_epochs;
        cfg.validate_every = validate_every;
        cfg.patience = patience;
        cfg.min_delta = min_delta;
        cfg.val_fraction = val_fraction;
        cfg.seed = seed;
        cfg.channels = parse_channel_mask(channels);
        return cfg;
    }

    // Canonical key = value dump in fixed order; doubles use %.17g so the
    // hash distinguishes any value change while staying reproducible.
    std::string canonical_string() const {
        std::string out;
        auto add_int = [&out](const char* name, long long v) {
            out += name;
            out += '=';
            out += std::to_string(v);
            out += '\n';
        };
        auto add_double = [&out](const char* name, double v) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out += name;
            out += '=';
            out += buf;
            out += '\n';
        };
        auto add_str = [&out](const char* name, const std::string& v) {
            out += name;
            out += '=';
            out += v;
            out += '\n';
        };
        add_int("text.k", k);
        add_int("text.dim", text_dim);
        add_int("text.top_n", retrieval_top_n);
        add_int("path.max_length", path_max_length);
        add_int("path.top_m", path_top_m);
        add_int("path.budget", path_budget);
        add_int("path.min_support", path_min_support);
        add_str("embedding.model", model_kind_name(model_kind));
        add_int("embedding.dim", embed_dim);
        add_int("embedding.epochs", embed_epochs);
        add_double("embedding.lr", embed_lr);
        add_int("embedding.negatives", embed_negatives);
        add_double("embedding.margin", embed_margin);
        add_double("embedding.reg", embed_reg);
        add_int("embedding.batch", embed_batch);
        add_int("ensemble.text_hidden", text_hidden);
        add_int("ensemble.text_out", text_out);
        add_int("ensemble.emb_hidden", emb_hidden);
        add_int("ensemble.emb_out", emb_out);
        add_int("ensemble.fuse_hidden", fuse_hidden);
        add_int("ensemble.fuse_out", fuse_out);
        add_double("ensemble.dropout_keep", dropout_keep);
        add_double("ensemble.lr", lr);
        add_int("ensemble.max_epochs", max_epochs);
        add_int("ensemble.validate_every", validate_every);
        add_int("ensemble.patience", patience);
        add_double("ensemble.min_delta", min_delta);
        add_double("ensemble.val_fraction", val_fraction);
        add_int("pipeline.seed", static_cast<long long>(seed));
        add_str("pipeline.channels", channels);
        add_str("pipeline.missing_embedding", missing_embedding);
        return out;
    }

    std::string config_hash() const {
        std::string canon = canonical_string();
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(canon.data(), canon.size()));
        return buf;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline long long parse_int_value(const std::string& v, const std::string& key,
                                 std::size_t lineno) {
    try {
        std::size_t used = 0;
        long long x = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ParseError("key '" + key + "' expects an integer, got '" + v + "'", lineno, 1);
    }
}

inline double parse_double_value(const std::string& v, const std::string& key,
                                 std::size_t lineno) {
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return x;
    } catch (const std::exception&) {
        throw ParseError("key '" + key + "' expects a number, got '" + v + "'", lineno, 1);
    }
}

inline std::string parse_string_value(const std::string& v, const std::string& key,
                                      std::size_t lineno) {
    if (v.size() < 2 || v.front() != '"' || v.back() != '"')
        throw ParseError("key '" + key + "' expects a double-quoted string, got '" + v + "'",
                         lineno, 1);
    return v.substr(1, v.size() - 2);
}

using ConfigSetter = std::function<void(PipelineConfig&, const std::string&, std::size_t)>;

inline const std::map<std::string, ConfigSetter>& config_setters() {
    static const std::map<std::string, ConfigSetter> setters = [] {
        std::map<std::string, ConfigSetter> m;
        auto int_field = [&m](const char* key, int PipelineConfig::* field) {
            m[key] = [key, field](PipelineConfig& c, const std::string& v, std::size_t ln) {
                c.*field = static_cast<int>(parse_int_value(v, key, ln));
            };
        };
        auto double_field = [&m](const char* key, double PipelineConfig::* field) {
            m[key] = [key, field](PipelineConfig& c, const std::string& v, std::size_t ln) {
                c.*field = parse_double_value(v, key, ln);
            };
        };
        int_field("text.k", &PipelineConfig::k);
        int_field("text.dim", &PipelineConfig::text_dim);
        int_field("text.top_n", &PipelineConfig::retrieval_top_n);
        int_field("path.max_length", &PipelineConfig::path_max_length);
        int_field("path.top_m", &PipelineConfig::path_top_m);
        int_field("path.budget", &PipelineConfig::path_budget);
        int_field("path.min_support", &PipelineConfig::path_min_support);
        m["embedding.model"] = [](PipelineConfig& c, const std::string& v, std::size_t ln) {
            c.model_kind = parse_model_kind(parse_string_value(v, "embedding.model", ln));
        };
        int_field("embedding.dim", &PipelineConfig::embed_dim);
        int_field("embedding.epochs", &PipelineConfig::embed_epochs);
        double_field("embedding.lr", &PipelineConfig::embed_lr);
        int_field("embedding.negatives", &PipelineConfig::embed_negatives);
        double_field("embedding.margin", &PipelineConfig::embed_margin);
        double_field("embedding.reg", &PipelineConfig::embed_reg);
        int_field("embedding.batch", &PipelineConfig::embed_batch);
        int_field("ensemble.text_hidden", &PipelineConfig::text_hidden);
        int_field("ensemble.text_out", &PipelineConfig::text_out);
        int_field("ensemble.emb_hidden", &PipelineConfig::emb_hidden);
        int_field("ensemble.emb_out", &PipelineConfig::emb_out);
        int_field("ensemble.fuse_hidden", &PipelineConfig::fuse_hidden);
        int_field("ensemble.fuse_out", &PipelineConfig::fuse_out);
        double_field("ensemble.dropout_keep", &PipelineConfig::dropout_keep);
        double_field("ensemble.lr", &PipelineConfig::lr);
        int_field("ensemble.max_epochs", &PipelineConfig::max_epochs);
        int_field("ensemble.validate_every", &PipelineConfig::validate_every);
        int_field("ensemble.patience", &PipelineConfig::patience);
        double_field("ensemble.min_delta", &PipelineConfig::min_delta);
        double_field("ensemble.val_fraction", &PipelineConfig::val_fraction);
        m["pipeline.seed"] = [](PipelineConfig& c, const std::string& v, std::size_t ln) {
            try {
                std::size_t used = 0;
                c.seed = std::stoull(v, &used);
                if (used != v.size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw ParseError("key 'pipeline.seed' expects an unsigned integer, got '" + v +
                                     "'",
                                 ln, 1);
            }
        };
        m["pipeline.channels"] = [](PipelineConfig& c, const std::string& v, std::size_t ln) {
            c.channels = parse_string_value(v, "pipeline.channels", ln);
        };
        m["pipeline.missing_embedding"] = [](PipelineConfig& c, const std::string& v,
                                             std::size_t ln) {
            c.missing_embedding = parse_string_value(v, "pipeline.missing_embedding", ln);
        };
        return m;
    }();
    return setters;
}

}  // namespace detail

// Applies one `section.key = value` assignment. Values use TOML syntax; on
// the command-line path (lineno 0) bare strings are accepted without quotes.
inline void apply_config_setting(PipelineConfig& cfg, const std::string& key,
                                 const std::string& value, std::size_t lineno = 0) {
    const auto& setters = detail::config_setters();
    auto it = setters.find(key);
    if (it == setters.end()) {
        std::string known;
        for (const auto& [name, _] : setters) {
            if (!known.empty()) known += ", ";
            known += name;
        }
        throw ParseError("unknown configuration key '" + key + "' (known keys: " + known + ")",
                         lineno, 1);
    }
    static const std::set<std::string> string_keys = {"embedding.model", "pipeline.channels",
                                                      "pipeline.missing_embedding"};
    std::string v = value;
    if (lineno == 0 && string_keys.count(key) && (v.empty() || v.front() != '"'))
        v = '"' + v + '"';
    it->second(cfg, v, lineno);
}

// TOML subset: [section] headers, key = value lines, # comments. Values are
// integers, floats, booleans, or double-quoted strings.
inline PipelineConfig load_config_toml(std::istream& in, PipelineConfig base = {}) {
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) {
            // # inside a quoted value is content, not a comment.
            std::size_t quotes = 0;
            for (std::size_t i = 0; i < hash; ++i)
                if (line[i] == '"') ++quotes;
            if (quotes % 2 == 0) line = line.substr(0, hash);
        }
        std::string text = detail::trim(line);
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']')
                throw ParseError("unterminated section header", lineno, 1);
            section = detail::trim(text.substr(1, text.size() - 2));
            if (section.empty()) throw ParseError("empty section name", lineno, 1);
            continue;
        }
        std::size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", lineno, 1);
        std::string key = detail::trim(text.substr(0, eq));
        std::string value = detail::trim(text.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", lineno, 1);
        if (value.empty()) throw ParseError("empty value for key '" + key + "'", lineno, 1);
        std::string full_key = section.empty() ? key : section + "." + key;
        apply_config_setting(base, full_key, value, lineno);
    }
    return base;
}

inline PipelineConfig load_config_toml(const std::string& path, PipelineConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return load_config_toml(in, base);
}

// Writes the configuration back out as the same TOML subset it reads.
inline void save_config_toml(const PipelineConfig& cfg, std::ostream& out) {
    std::string canon = cfg.canonical_string();
    std::string section;
    std::size_t start = 0;
    while (start < canon.size()) {
        std::size_t nl = canon.find('\n', start);
        std::string entry = canon.substr(start, nl - start);
        start = nl + 1;
        std::size_t dot = entry.find('.');
        std::size_t eq = entry.find('=');
        std::string sec = entry.substr(0, dot);
        std::string key = entry.substr(dot + 1, eq - dot - 1);
        std::string value = entry.substr(eq + 1);
        if (sec != section) {
            if (!section.empty()) out << '\n';
            out << '[' << sec << "]\n";
            section = sec;
        }
        bool quoted = key == "model" || key == "channels" || key == "missing_embedding";
        out << key << " = ";
        if (quoted) out << '"' << value << '"';
        else out << value;
        out << '\n';
    }
}

inline void save_config_toml(const PipelineConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open config file for writing: " + path);
    save_config_toml(cfg, out);
}

}  // namespace hybridfc
