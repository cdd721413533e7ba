#pragma once
// Pluggable sentence embedding b(t). Two implementations: a deterministic
// hashed bag-of-words baseline, and a table of precomputed vectors keyed by a
// sentence hash so externally computed transformer embeddings can be used
// offline.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "hybridfc/corpus.hpp"
#include "hybridfc/errors.hpp"
#include "hybridfc/rng.hpp"

namespace hybridfc {

class SentenceEmbedder {
public:
    virtual ~SentenceEmbedder() = default;
    virtual int dim() const = 0;
    // Writes b(sentence) into `out` (length dim()). Returns false when this
    // embedder has no vector for the sentence; callers skip the snippet.
    virtual bool embed(const std::string& sentence, std::span<double> out) const = 0;
};

// Hashed bag-of-words: each token is hashed to a bucket and a sign, counts
// are accumulated and the result L2-normalized. Fully deterministic.
class HashedBowEmbedder : public SentenceEmbedder {
public:
    explicit HashedBowEmbedder(int dim = 256, std::uint64_t hash_seed = 0x9e3779b97f4a7c15ULL)
        : dim_(dim), hash_seed_(hash_seed) {
        if (dim <= 0) throw ConfigError("sentence embedding dim must be positive");
    }

    int dim() const override { return dim_; }

    bool embed(const std::string& sentence, std::span<double> out) const override {
        if (out.size() != static_cast<std::size_t>(dim_))
            throw ContractViolation("HashedBowEmbedder: output span size mismatch");
        std::fill(out.begin(), out.end(), 0.0);
        for (const std::string& token : tokenize(sentence)) {
            std::uint64_t h = fnv1a64(token.data(), token.size(), hash_seed_);
            std::size_t bucket = h % static_cast<std::uint64_t>(dim_);
            double sign = (h >> 63) ? -1.0 : 1.0;
            out[bucket] += sign;
        }
        double sq = 0.0;
        for (double v : out) sq += v * v;
        if (sq > 0.0) {
            double inv = 1.0 / std::sqrt(sq);
            for (double& v : out) v *= inv;
        }
        return true;
    }

private:
    int dim_;
    std::uint64_t hash_seed_;
};

// 16-hex-digit FNV-1a hash of the raw sentence bytes; the join key for
// precomputed embedding files.
inline std::string sentence_hash(const std::string& sentence) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(
                      fnv1a64(sentence.data(), sentence.size())));
    return buf;
}

// Precomputed embeddings: JSON-lines records {"hash": "<16 hex>", "vector":
// [..]} produced by any external model. Sentences absent from the table are
// reported as un-embeddable.
class PrecomputedEmbedder : public SentenceEmbedder {
public:
    static PrecomputedEmbedder load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open " + path.string());
        PrecomputedEmbedder emb;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(std::string("bad JSON: ") + e.what(), lineno, 1);
            }
            std::string hash;
            std::vector<double> vec;
            try {
                hash = j.at("hash").get<std::string>();
                vec = j.at("vector").get<std::vector<double>>();
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(std::string("bad embedding record: ") + e.what(),
                                 lineno, 1);
            }
            if (vec.empty()) throw ParseError("empty embedding vector", lineno, 1);
            if (emb.dim_ == 0) {
                emb.dim_ = static_cast<int>(vec.size());
            } else if (emb.dim_ != static_cast<int>(vec.size())) {
                throw ParseError("embedding dimension changed from " +
                                 std::to_string(emb.dim_) + " to " +
                                 std::to_string(vec.size()), lineno, 1);
            }
            emb.table_[hash] = std::move(vec);
        }
        if (emb.table_.empty())
            throw ConfigError("no embeddings in " + path.string());
        return emb;
    }

    int dim() const override { return dim_; }

    bool embed(const std::string& sentence, std::span<double> out) const override {
        if (out.size() != static_cast<std::size_t>(dim_))
            throw ContractViolation("PrecomputedEmbedder: output span size mismatch");
        auto it = table_.find(sentence_hash(sentence));
        if (it == table_.end()) return false;
        std::copy(it->second.begin(), it->second.end(), out.begin());
        return true;
    }

    std::size_t size() const { return table_.size(); }

private:
    int dim_ = 0;
    std::unordered_map<std::string, std::vector<double>> table_;
};

}  // namespace hybridfc
