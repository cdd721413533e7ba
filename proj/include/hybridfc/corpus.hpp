#pragma once
// Reference corpus: JSON-lines ingestion, sentence tokenization, an inverted
// sentence index, and BM25 scoring (k1=1.2, b=0.75). The index treats each
// sentence as one retrieval unit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "hybridfc/errors.hpp"
#include "hybridfc/pagerank.hpp"

namespace hybridfc {

struct CorpusDocument {
    std::string doc_id;
    std::string source_id;
    std::vector<std::string> sentences;
    std::vector<std::string> out_links;
};

// Lowercased alphanumeric token runs; bytes >= 0x80 count as letters so
// UTF-8 text tokenizes stably without decoding.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        bool word = std::isalnum(c) || c >= 0x80;
        if (word) {
            current += static_cast<char>(std::tolower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

// True when `phrase` occurs as a contiguous token subsequence of `tokens`.
inline bool contains_phrase(const std::vector<std::string>& tokens,
                            const std::vector<std::string>& phrase) {
    if (phrase.empty() || phrase.size() > tokens.size()) return false;
    for (std::size_t i = 0; i + phrase.size() <= tokens.size(); ++i) {
        bool match = true;
        for (std::size_t j = 0; j < phrase.size(); ++j) {
            if (tokens[i + j] != phrase[j]) {
                match = false;
                break;
            }
        }
        if (match) return true;
    }
    return false;
}

struct SentenceRef {
    std::size_t doc;       // index into documents()
    std::size_t sentence;  // index into that document's sentences
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

class Corpus {
public:
    void add_document(CorpusDocument doc, std::size_t lineno = 0) {
        if (doc.doc_id.empty()) throw ParseError("document needs a doc_id", lineno, 1);
        if (doc_index_.count(doc.doc_id))
            throw ParseError("duplicate doc_id '" + doc.doc_id + "'", lineno, 1);
        doc_index_[doc.doc_id] = docs_.size();
        docs_.push_back(std::move(doc));
    }

    // Validates links, tokenizes, and builds the inverted index and the
    // PageRank scores. Unknown out-links are dropped with a warning.
    void finalize(const PagerankOptions& pr_opt = {}) {
        warnings_.clear();
        link_graph_.assign(docs_.size(), {});
        for (std::size_t i = 0; i < docs_.size(); ++i) {
            std::vector<std::string> kept;
            for (const std::string& target : docs_[i].out_links) {
                auto it = doc_index_.find(target);
                if (it == doc_index_.end()) {
                    warnings_.push_back("document '" + docs_[i].doc_id +
                                        "' links to unknown doc '" + target +
                                        "' (dropped)");
                    continue;
                }
                kept.push_back(target);
                link_graph_[i].push_back(static_cast<int>(it->second));
            }
            docs_[i].out_links = std::move(kept);
        }

        sentences_.clear();
        tokens_.clear();
        postings_.clear();
        total_tokens_ = 0;
        for (std::size_t d = 0; d < docs_.size(); ++d) {
            for (std::size_t s = 0; s < docs_[d].sentences.size(); ++s) {
                std::size_t sid = sentences_.size();
                sentences_.push_back({d, s});
                tokens_.push_back(tokenize(docs_[d].sentences[s]));
                total_tokens_ += tokens_.back().size();
                std::vector<std::string> uniq = tokens_.back();
                std::sort(uniq.begin(), uniq.end());
                uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
                for (const std::string& t : uniq)
                    postings_[t].push_back(sid);
            }
        }

        pagerank_.clear();
        if (!docs_.empty()) {
            std::vector<double> pr = pagerank(link_graph_, pr_opt);
            for (std::size_t i = 0; i < docs_.size(); ++i)
                pagerank_[docs_[i].doc_id] = pr[i];
        }
    }

    const std::vector<CorpusDocument>& documents() const { return docs_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    std::size_t sentence_count() const { return sentences_.size(); }
    const SentenceRef& sentence_ref(std::size_t sid) const { return sentences_[sid]; }
    const std::string& sentence_text(std::size_t sid) const {
        const SentenceRef& ref = sentences_[sid];
        return docs_[ref.doc].sentences[ref.sentence];
    }
    const std::vector<std::string>& sentence_tokens(std::size_t sid) const {
        return tokens_[sid];
    }
    const CorpusDocument& sentence_doc(std::size_t sid) const {
        return docs_[sentences_[sid].doc];
    }
    const std::unordered_map<std::string, double>& pagerank_by_doc() const {
        return pagerank_;
    }

    // Highest PageRank among a source's documents.
    std::unordered_map<std::string, double> pagerank_by_source() const {
        std::unordered_map<std::string, double> out;
        for (const CorpusDocument& doc : docs_) {
            double pr = pagerank_.at(doc.doc_id);
            auto [it, fresh] = out.try_emplace(doc.source_id, pr);
            if (!fresh && pr > it->second) it->second = pr;
        }
        return out;
    }

    // Sentence ids containing every query token at least once (conjunctive
    // candidate pool; phrase filtering happens in the caller).
    std::vector<std::size_t> candidates_with_all(const std::vector<std::string>& terms) const {
        if (terms.empty()) return {};
        std::vector<std::size_t> current;
        bool first = true;
        for (const std::string& t : terms) {
            auto it = postings_.find(t);
            if (it == postings_.end()) return {};
            if (first) {
                current = it->second;
                first = false;
            } else {
                std::vector<std::size_t> merged;
                std::set_intersection(current.begin(), current.end(),
                                      it->second.begin(), it->second.end(),
                                      std::back_inserter(merged));
                current = std::move(merged);
            }
            if (current.empty()) return {};
        }
        return current;
    }

    std::size_t doc_frequency(const std::string& term) const {
        auto it = postings_.find(term);
        return it == postings_.end() ? 0 : it->second.size();
    }

    double average_sentence_length() const {
        if (sentences_.empty()) return 0.0;
        return static_cast<double>(total_tokens_) /
               static_cast<double>(sentences_.size());
    }

    // BM25 score of one sentence for a query token list. Repeated query
    // tokens contribute once per occurrence. idf = ln(1 + (N−df+0.5)/(df+0.5)).
    double bm25(const std::vector<std::string>& query, std::size_t sid,
                const Bm25Params& params = {}) const {
        const std::vector<std::string>& sent = tokens_[sid];
        double n = static_cast<double>(sentences_.size());
        double avgdl = average_sentence_length();
        double score = 0.0;
        for (const std::string& term : query) {
            double df = static_cast<double>(doc_frequency(term));
            if (df == 0.0) continue;
            double tf = static_cast<double>(
                std::count(sent.begin(), sent.end(), term));
            if (tf == 0.0) continue;
            double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            double dl = static_cast<double>(sent.size());
            double norm = params.k1 * (1.0 - params.b + params.b * dl / avgdl);
            score += idf * tf * (params.k1 + 1.0) / (tf + norm);
        }
        return score;
    }

private:
    std::vector<CorpusDocument> docs_;
    std::unordered_map<std::string, std::size_t> doc_index_;
    std::vector<std::vector<int>> link_graph_;
    std::vector<SentenceRef> sentences_;
    std::vector<std::vector<std::string>> tokens_;
    std::unordered_map<std::string, std::vector<std::size_t>> postings_;
    std::size_t total_tokens_ = 0;
    std::vector<std::string> warnings_;
    std::unordered_map<std::string, double> pagerank_;
};

// --- JSON-lines ingestion ----------------------------------------------------

inline CorpusDocument parse_corpus_line(const std::string& line, std::size_t lineno) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad JSON: ") + e.what(), lineno, 1);
    }
    if (!j.is_object()) throw ParseError("document line must be a JSON object", lineno, 1);
    CorpusDocument doc;
    try {
        doc.doc_id = j.at("doc_id").get<std::string>();
        doc.source_id = j.at("source_id").get<std::string>();
        doc.sentences = j.at("sentences").get<std::vector<std::string>>();
        if (j.contains("out_links"))
            doc.out_links = j.at("out_links").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad document fields: ") + e.what(), lineno, 1);
    }
    if (doc.doc_id.empty()) throw ParseError("doc_id must be non-empty", lineno, 1);
    return doc;
}

inline Corpus load_corpus_jsonl(std::istream& in, const PagerankOptions& pr_opt = {}) {
    Corpus corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        corpus.add_document(parse_corpus_line(line, lineno), lineno);
    }
    corpus.finalize(pr_opt);
    return corpus;
}

inline Corpus load_corpus_jsonl(const std::filesystem::path& path,
                                const PagerankOptions& pr_opt = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    return load_corpus_jsonl(in, pr_opt);
}

inline void save_corpus_jsonl(const Corpus& corpus, std::ostream& out) {
    for (const CorpusDocument& doc : corpus.documents()) {
        nlohmann::json j{{"doc_id", doc.doc_id},
                         {"source_id", doc.source_id},
                         {"sentences", doc.sentences},
                         {"out_links", doc.out_links}};
        out << j.dump() << '\n';
    }
}

}  // namespace hybridfc
