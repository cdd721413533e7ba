#pragma once
// Evidence bundles: the per-assertion channel inputs (text vector φ_ℵ,
// assertion embedding φ(s,p,o), path score ζ) gathered once and cached, so
// ensemble training never re-queries the channels. Bundles persist as JSON
// Lines next to the dataset they were computed from.

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridfc/dataset.hpp"
#include "hybridfc/embedding.hpp"
#include "hybridfc/ensemble.hpp"
#include "hybridfc/errors.hpp"
#include "hybridfc/kg.hpp"
#include "hybridfc/path_evidence.hpp"
#include "hybridfc/sentence_embedder.hpp"
#include "hybridfc/term.hpp"
#include "hybridfc/text_evidence.hpp"

namespace hybridfc {

struct EvidenceBundle {
    std::vector<double> text;       // k·(d+1) values, zero-padded
    std::vector<double> embedding;  // 3·d_emb values; zeros when missing
    double zeta = 0.0;
    bool embedding_missing = false;
};

struct EvidenceRecord {
    LabeledAssertion assertion;
    EvidenceBundle bundle;
};

enum class MissingEmbeddingPolicy { Zero, Skip };

inline MissingEmbeddingPolicy parse_missing_policy(const std::string& name) {
    if (name == "zero") return MissingEmbeddingPolicy::Zero;
    if (name == "skip") return MissingEmbeddingPolicy::Skip;
    throw ConfigError("unknown missing-embedding policy '" + name + "' (expected zero or skip)");
}

struct EvidenceBuildOptions {
    int k = 3;       // snippets kept per assertion
    int top_n = 20;  // retrieval depth before top-k selection
    PathEvidenceOptions path;
    MissingEmbeddingPolicy missing = MissingEmbeddingPolicy::Zero;
};

struct EvidenceDiagnostics {
    std::size_t built = 0;
    std::size_t skipped = 0;             // dropped under the skip policy
    std::size_t missing_embeddings = 0;  // assertions without full s/p/o vectors
    std::size_t without_snippets = 0;
    std::size_t zero_zeta = 0;
    std::vector<std::string> warnings;
};

// Everything `--explain` shows for one assertion.
struct EvidenceExplanation {
    std::vector<EvidenceSnippet> snippets;
    PathVeracity paths;
    std::vector<std::string> warnings;
};

class EvidenceBuilder {
public:
    EvidenceBuilder(const KnowledgeGraph& kg, const TextEvidence& text,
                    const SentenceEmbedder& embedder, const EmbeddingModel& model,
                    EvidenceBuildOptions opt = {})
        : kg_(&kg), text_(&text), embedder_(&embedder), model_(&model), opt_(opt) {
        if (opt_.k < 1) throw ConfigError("evidence: k must be >= 1");
        if (opt_.top_n < opt_.k) throw ConfigError("evidence: top_n must be >= k");
    }

    int text_dim() const { return opt_.k * (embedder_->dim() + 1); }
    int emb_dim() const { return 3 * model_->real_dim(); }

    // Builds the bundle for one (s, p, o) IRI triple. Unknown graph entities
    // yield empty channels rather than errors; a missing embedding is either
    // zero-filled or flagged for skipping, per the configured policy.
    EvidenceBundle build(const std::string& s, const std::string& p, const std::string& o,
                         EvidenceExplanation* explain = nullptr,
                         EvidenceDiagnostics* diag = nullptr) {
        EvidenceBundle bundle;
        const TermTable& terms = kg_->terms();
        TermId si = terms.find_iri(s);
        TermId pi = terms.find_iri(p);
        TermId oi = terms.find_iri(o);

        std::string s_label = si != kNoTerm ? kg_->label(si) : iri_local_name(s);
        std::string o_label = oi != kNoTerm ? kg_->label(oi) : iri_local_name(o);
        std::string p_surface = pi != kNoTerm ? kg_->label(pi) : iri_local_name(p);

        std::vector<EvidenceSnippet> selected;
        std::vector<std::string> warnings;
        TextFeatureVector tv = text_->text_vector(s_label, p_surface, o_label, *embedder_,
                                                  opt_.k, opt_.top_n, &selected, &warnings);
        bundle.text = std::move(tv.values);
        if (diag && selected.empty()) ++diag->without_snippets;

        PathVeracity pv = path_veracity(*kg_, si, pi, oi, opt_.path, &path_cache_);
        bundle.zeta = pv.zeta;
        if (diag && pv.zeta == 0.0) ++diag->zero_zeta;

        try {
            bundle.embedding = model_->assertion_embedding(s, p, o);
        } catch (const MissingEmbedding& e) {
            bundle.embedding_missing = true;
            bundle.embedding.assign(static_cast<std::size_t>(emb_dim()), 0.0);
            warnings.push_back(e.what());
            if (diag) ++diag->missing_embeddings;
        }

        if (diag) {
            ++diag->built;
            diag->warnings.insert(diag->warnings.end(), warnings.begin(), warnings.end());
        }
        if (explain) {
            explain->snippets = std::move(selected);
            explain->paths = std::move(pv);
            explain->warnings = std::move(warnings);
        }
        return bundle;
    }

    // Builds bundles for a dataset. Under the skip policy, assertions with
    // missing embeddings are dropped (and counted in the diagnostics).
    std::vector<EvidenceRecord> build_dataset(const std::vector<LabeledAssertion>& assertions,
                                              EvidenceDiagnostics* diag = nullptr) {
        std::vector<EvidenceRecord> out;
        out.reserve(assertions.size());
        for (const LabeledAssertion& a : assertions) {
            EvidenceBundle bundle = build(a.subject, a.predicate, a.object, nullptr, diag);
            if (bundle.embedding_missing && opt_.missing == MissingEmbeddingPolicy::Skip) {
                if (diag) ++diag->skipped;
                continue;
            }
            out.push_back({a, std::move(bundle)});
        }
        return out;
    }

    const EvidenceBuildOptions& options() const { return opt_; }
    std::size_t cached_associations() const { return path_cache_.size(); }

private:
    const KnowledgeGraph* kg_;
    const TextEvidence* text_;
    const SentenceEmbedder* embedder_;
    const EmbeddingModel* model_;
    EvidenceBuildOptions opt_;
    PathAssociationCache path_cache_;
};

inline EnsembleExample to_example(const EvidenceRecord& record) {
    EnsembleExample ex;
    ex.text = record.bundle.text;
    ex.embedding = record.bundle.embedding;
    ex.zeta = record.bundle.zeta;
    ex.label = record.assertion.label;
    return ex;
}

inline std::vector<EnsembleExample> to_examples(const std::vector<EvidenceRecord>& records) {
    std::vector<EnsembleExample> out;
    out.reserve(records.size());
    for (const EvidenceRecord& r : records) out.push_back(to_example(r));
    return out;
}

// ---- JSONL cache ----------------------------------------------------------

inline void save_evidence_jsonl(const std::vector<EvidenceRecord>& records, std::ostream& out) {
    for (const EvidenceRecord& r : records) {
        nlohmann::json j;
        j["subject"] = r.assertion.subject;
        j["predicate"] = r.assertion.predicate;
        j["object"] = r.assertion.object;
        j["label"] = r.assertion.label;
        j["category"] = r.assertion.category;
        j["split"] = r.assertion.split;
        j["text"] = r.bundle.text;
        j["embedding"] = r.bundle.embedding;
        j["zeta"] = r.bundle.zeta;
        j["embedding_missing"] = r.bundle.embedding_missing;
        out << j.dump() << '\n';
    }
}

inline void save_evidence_jsonl(const std::vector<EvidenceRecord>& records,
                                const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open evidence file for writing: " + path);
    save_evidence_jsonl(records, out);
}

inline std::vector<EvidenceRecord> load_evidence_jsonl(std::istream& in) {
    std::vector<EvidenceRecord> out;
    std::string line;
    std::size_t lineno = 0;
    std::size_t text_dim = 0, emb_dim = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        EvidenceRecord r;
        r.assertion = parse_assertion_line(line, lineno);
        nlohmann::json j = nlohmann::json::parse(line);
        for (const char* key : {"text", "embedding", "zeta", "embedding_missing"})
            if (!j.contains(key))
                throw ParseError(std::string("evidence record is missing field '") + key + "'",
                                 lineno, 1);
        if (!j["text"].is_array() || !j["embedding"].is_array())
            throw ParseError("evidence vectors must be JSON arrays", lineno, 1);
        r.bundle.text = j["text"].get<std::vector<double>>();
        r.bundle.embedding = j["embedding"].get<std::vector<double>>();
        r.bundle.zeta = j["zeta"].get<double>();
        r.bundle.embedding_missing = j["embedding_missing"].get<bool>();
        if (out.empty()) {
            text_dim = r.bundle.text.size();
            emb_dim = r.bundle.embedding.size();
        } else if (r.bundle.text.size() != text_dim || r.bundle.embedding.size() != emb_dim) {
            throw ParseError("evidence vector widths differ from the first record", lineno, 1);
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<EvidenceRecord> load_evidence_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open evidence file: " + path);
    return load_evidence_jsonl(in);
}

}  // namespace hybridfc
