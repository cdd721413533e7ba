#pragma once
// Text evidence channel: phrase-filtered BM25 retrieval of candidate
// sentences, PageRank-based top-k selection, per-source trust, and the
// fixed-length text feature vector (k snippet embeddings, each followed by
// its trust score, zero-padded to k·(d+1)).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "hybridfc/corpus.hpp"
#include "hybridfc/errors.hpp"
#include "hybridfc/sentence_embedder.hpp"

namespace hybridfc {

struct EvidenceSnippet {
    std::string text;
    std::string doc_id;
    std::string source_id;
    double retrieval_score = 0.0;  // BM25
    double pagerank = 0.0;
    double trust = 0.0;
    std::size_t sentence_id = 0;   // position in the corpus sentence list
};

// trust-table entry if configured; else min-max normalized PageRank over the
// per-source map (a single-source corpus degenerates to 1.0); else 0.5.
inline double trust_score(const std::string& source_id,
                          const std::unordered_map<std::string, double>& trust_table,
                          const std::unordered_map<std::string, double>& pagerank_by_source) {
    if (auto it = trust_table.find(source_id); it != trust_table.end())
        return it->second;
    auto it = pagerank_by_source.find(source_id);
    if (it == pagerank_by_source.end()) return 0.5;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& [source, pr] : pagerank_by_source) {
        lo = std::min(lo, pr);
        hi = std::max(hi, pr);
    }
    if (hi <= lo) return 1.0;
    return (it->second - lo) / (hi - lo);
}

// Stable sort by PageRank descending (ties: retrieval score descending, then
// doc-id lexicographic), keeping the first k.
inline std::vector<EvidenceSnippet> select_topk(std::vector<EvidenceSnippet> snippets,
                                                int k) {
    if (k < 1) throw ContractViolation("select_topk: k must be >= 1");
    std::stable_sort(snippets.begin(), snippets.end(),
                     [](const EvidenceSnippet& a, const EvidenceSnippet& b) {
                         if (a.pagerank != b.pagerank) return a.pagerank > b.pagerank;
                         if (a.retrieval_score != b.retrieval_score)
                             return a.retrieval_score > b.retrieval_score;
                         return a.doc_id < b.doc_id;
                     });
    if (snippets.size() > static_cast<std::size_t>(k))
        snippets.resize(static_cast<std::size_t>(k));
    return snippets;
}

struct TextFeatureVector {
    std::vector<double> values;  // length k·(d+1)
    int used_snippets = 0;
};

// φ = ⊕ᵢ (b(tᵢ) ⊕ τᵢ), zero-padded to k·(d+1). Sentences the embedder cannot
// embed are skipped (and reported via `warnings`), extending the padding.
inline TextFeatureVector embed_sentences(const std::vector<EvidenceSnippet>& snippets,
                                         const SentenceEmbedder& embedder, int k,
                                         std::vector<std::string>* warnings = nullptr) {
    if (k < 1) throw ContractViolation("embed_sentences: k must be >= 1");
    if (snippets.size() > static_cast<std::size_t>(k))
        throw ContractViolation("embed_sentences: more than k snippets");
    int d = embedder.dim();
    TextFeatureVector out;
    out.values.assign(static_cast<std::size_t>(k) * (d + 1), 0.0);
    int slot = 0;
    std::vector<double> buffer(d);
    for (const EvidenceSnippet& snippet : snippets) {
        if (!embedder.embed(snippet.text, buffer)) {
            if (warnings)
                warnings->push_back("no embedding for sentence in doc '" +
                                    snippet.doc_id + "'; skipped");
            continue;
        }
        double* base = out.values.data() + static_cast<std::size_t>(slot) * (d + 1);
        std::copy(buffer.begin(), buffer.end(), base);
        base[d] = snippet.trust;
        ++slot;
    }
    out.used_snippets = slot;
    return out;
}

// Retrieval + selection over one corpus, with trust wiring.
class TextEvidence {
public:
    explicit TextEvidence(const Corpus& corpus,
                          std::unordered_map<std::string, double> trust_table = {},
                          Bm25Params bm25 = {})
        : corpus_(&corpus), trust_table_(std::move(trust_table)), bm25_(bm25),
          source_pagerank_(corpus.pagerank_by_source()) {}

    // Candidate sentences contain both labels as contiguous token phrases
    // (case-insensitive); ranking is BM25 of "s-label p-surface o-label".
    std::vector<EvidenceSnippet> retrieve_snippets(const std::string& s_label,
                                                   const std::string& p_surface,
                                                   const std::string& o_label,
                                                   int top_n) const {
        if (top_n < 1) throw ContractViolation("retrieve_snippets: top_n must be >= 1");
        std::vector<std::string> s_tokens = tokenize(s_label);
        std::vector<std::string> o_tokens = tokenize(o_label);
        if (s_tokens.empty() || o_tokens.empty()) return {};

        std::vector<std::string> all_terms = s_tokens;
        all_terms.insert(all_terms.end(), o_tokens.begin(), o_tokens.end());
        std::vector<std::string> query = tokenize(s_label + " " + p_surface + " " + o_label);

        std::vector<EvidenceSnippet> hits;
        for (std::size_t sid : corpus_->candidates_with_all(all_terms)) {
            const std::vector<std::string>& sent = corpus_->sentence_tokens(sid);
            if (!contains_phrase(sent, s_tokens) || !contains_phrase(sent, o_tokens))
                continue;
            const CorpusDocument& doc = corpus_->sentence_doc(sid);
            EvidenceSnippet snippet;
            snippet.text = corpus_->sentence_text(sid);
            snippet.doc_id = doc.doc_id;
            snippet.source_id = doc.source_id;
            snippet.retrieval_score = corpus_->bm25(query, sid, bm25_);
            snippet.pagerank = corpus_->pagerank_by_doc().at(doc.doc_id);
            snippet.trust = trust_score(doc.source_id, trust_table_, source_pagerank_);
            snippet.sentence_id = sid;
            hits.push_back(std::move(snippet));
        }
        std::stable_sort(hits.begin(), hits.end(),
                         [](const EvidenceSnippet& a, const EvidenceSnippet& b) {
                             return a.retrieval_score > b.retrieval_score;
                         });
        if (hits.size() > static_cast<std::size_t>(top_n))
            hits.resize(static_cast<std::size_t>(top_n));
        return hits;
    }

    // Full channel: retrieve → select top-k by PageRank → embed.
    TextFeatureVector text_vector(const std::string& s_label,
                                  const std::string& p_surface,
                                  const std::string& o_label,
                                  const SentenceEmbedder& embedder, int k, int top_n,
                                  std::vector<EvidenceSnippet>* selected = nullptr,
                                  std::vector<std::string>* warnings = nullptr) const {
        std::vector<EvidenceSnippet> snippets =
            select_topk(retrieve_snippets(s_label, p_surface, o_label, top_n), k);
        if (selected) *selected = snippets;
        return embed_sentences(snippets, embedder, k, warnings);
    }

    const std::unordered_map<std::string, double>& source_pagerank() const {
        return source_pagerank_;
    }

private:
    const Corpus* corpus_;
    std::unordered_map<std::string, double> trust_table_;
    Bm25Params bm25_;
    std::unordered_map<std::string, double> source_pagerank_;
};

}  // namespace hybridfc
