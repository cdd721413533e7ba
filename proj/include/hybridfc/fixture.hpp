#pragma once
// Deterministic synthetic benchmark: a clustered knowledge graph, a small
// news-like corpus, and 300 labeled assertions planted so each evidence
// channel carries the signal for exactly one assertion category:
//   "text"      — true pairs are co-mentioned in corpus sentences,
//   "path"      — true pairs are joined by a planted via/via2 chain whose
//                 shape co-occurs with the target predicate elsewhere,
//   "embedding" — true pairs respect the cluster structure the embedding
//                 model learns from the graph.
// Everything is a pure function of FixtureSpec, so rebuilding the fixture
// with the same spec yields byte-identical artifacts.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hybridfc/config.hpp"
#include "hybridfc/corpus.hpp"
#include "hybridfc/dataset.hpp"
#include "hybridfc/errors.hpp"
#include "hybridfc/kg.hpp"
#include "hybridfc/ntriples.hpp"

namespace hybridfc {

struct FixtureSpec {
    int clusters = 4;
    int per_cluster = 50;   // entities per cluster
    int group_size = 100;   // assertions per category (half true, half false)
    int docs = 60;
    int filler_sentences = 300;
};

struct FixtureData {
    KnowledgeGraph kg;
    Corpus corpus;
    std::vector<LabeledAssertion> assertions;
    PipelineConfig config;
};

namespace detail {

inline std::string fixture_entity_iri(int c, int i) {
    return "http://example.org/e/e" + std::to_string(c) + "x" + std::to_string(i);
}

inline std::string fixture_entity_label(int c, int i) {
    return "e" + std::to_string(c) + "x" + std::to_string(i);
}

inline std::string fixture_hub_iri(int c) { return "http://example.org/e/hub" + std::to_string(c); }

inline std::string fixture_pred(const std::string& name) { return "http://example.org/p/" + name; }

}  // namespace detail

// Hyperparameters scaled down so the full fixture pipeline (embedding
// training, evidence building, seven-way ablation) runs in seconds.
inline PipelineConfig fixture_config() {
    PipelineConfig cfg;
    cfg.k = 3;
    cfg.text_dim = 32;
    cfg.retrieval_top_n = 20;
    cfg.model_kind = ModelKind::TransE;
    cfg.embed_dim = 16;
    cfg.embed_epochs = 200;
    cfg.embed_lr = 0.05;
    cfg.embed_negatives = 2;
    cfg.embed_margin = 1.0;
    cfg.embed_reg = 1e-5;
    cfg.embed_batch = 256;
    cfg.text_hidden = 64;
    cfg.text_out = 16;
    cfg.emb_hidden = 32;
    cfg.emb_out = 16;
    cfg.fuse_hidden = 16;
    cfg.fuse_out = 8;
    cfg.seed = 7;
    return cfg;
}

inline FixtureData make_fixture(const FixtureSpec& spec = {}) {
    using detail::fixture_entity_iri;
    using detail::fixture_entity_label;
    using detail::fixture_hub_iri;
    using detail::fixture_pred;
    if (spec.clusters < 4 || spec.per_cluster < 46 || spec.group_size % 4 != 0 ||
        spec.group_size < 8 || spec.docs < 6)
        throw ConfigError("fixture spec too small for the planted constructions");

    const int C = spec.clusters;
    const int P = spec.per_cluster;
    const std::string rel = fixture_pred("rel");
    const std::string via = fixture_pred("via");
    const std::string via2 = fixture_pred("via2");
    const std::string member_of = fixture_pred("memberOf");
    const std::string knows = fixture_pred("knows");

    FixtureData fx;
    fx.config = fixture_config();
    auto edge = [&fx](const std::string& s, const std::string& p, const std::string& o) {
        fx.kg.add_triple({fx.kg.terms().intern_iri(s), fx.kg.terms().intern_iri(p),
                          fx.kg.terms().intern_iri(o)});
    };

    // --- Knowledge graph -------------------------------------------------
    for (int c = 0; c < C; ++c) {
        for (int i = 0; i < P; ++i) {
            edge(fixture_entity_iri(c, i), member_of, fixture_hub_iri(c));
            for (int k = 1; k <= 4; ++k)
                edge(fixture_entity_iri(c, i), knows, fixture_entity_iri(c, (i + k) % P));
            // Same-cluster target-predicate edges: the pattern the embedding
            // model learns and the co-occurrence base for path associations.
            edge(fixture_entity_iri(c, i), rel, fixture_entity_iri(c, (i + 7) % P));
            edge(fixture_entity_iri(c, i), rel, fixture_entity_iri(c, (i + 11) % P));
            // Half of the (i -> i+7) rel pairs also get a via/via2 chain, so
            // the chain shape genuinely predicts rel.
            if (i % 2 == 0) {
                edge(fixture_entity_iri(c, i), via, fixture_entity_iri(c, (i + 13) % P));
                edge(fixture_entity_iri(c, (i + 13) % P), via2,
                     fixture_entity_iri(c, (i + 7) % P));
            }
        }
    }
    for (int c = 0; c < C; ++c) {
        fx.kg.set_label(fx.kg.terms().intern_iri(fixture_hub_iri(c)), "hub" + std::to_string(c));
        for (int i = 0; i < P; ++i)
            fx.kg.set_label(fx.kg.terms().intern_iri(fixture_entity_iri(c, i)),
                            fixture_entity_label(c, i));
    }

    // --- Assertions -------------------------------------------------------
    // Per category: group_size assertions, first half true, second half false.
    // Slot arithmetic keeps the three categories' pairs disjoint from each
    // other and from the background rel edges (offsets 7 and 11).
    const int half = spec.group_size / 2;
    auto add = [&fx, &rel](int sc, int si, int oc, int oi, bool label, const char* category,
                           const char* split) {
        LabeledAssertion a;
        a.subject = fixture_entity_iri(sc, si);
        a.predicate = rel;
        a.object = fixture_entity_iri(oc, oi);
        a.label = label ? 1 : 0;
        a.category = category;
        a.split = split;
        fx.assertions.push_back(std::move(a));
    };
    // Diagonal split: within each (category, label) block, alternate along
    // cluster+slot so train and test both cover every cluster. A parity split
    // on j alone would confound split with cluster (j % 4 picks the cluster)
    // and the ensemble would memorize cluster coordinates instead of evidence.
    auto split_of = [](int j) { return (j % 4 + j / 4) % 2 == 0 ? "train" : "test"; };

    struct Pair {
        int sc, si, oc, oi;
    };
    std::vector<Pair> text_true, text_false;
    for (int j = 0; j < half; ++j) {
        int c = j % 4, i = j / 4;
        text_true.push_back({c, i, (c + 2) % C, (i + 41) % P});
        text_false.push_back({c, i + 13, (c + 2) % C, (i + 43) % P});
    }
    for (int j = 0; j < half; ++j) {
        const Pair& t = text_true[static_cast<std::size_t>(j)];
        add(t.sc, t.si, t.oc, t.oi, true, "text", split_of(j));
    }
    for (int j = 0; j < half; ++j) {
        const Pair& f = text_false[static_cast<std::size_t>(j)];
        add(f.sc, f.si, f.oc, f.oi, false, "text", split_of(j));
    }

    for (int j = 0; j < half; ++j) {  // path: true pairs get a cross-cluster chain
        int c = j % 4, i = j / 4;
        add(c, i, (c + 1) % C, i, true, "path", split_of(j));
        edge(fixture_entity_iri(c, i), via, fixture_entity_iri(c, (i + 29) % P));
        edge(fixture_entity_iri(c, (i + 29) % P), via2, fixture_entity_iri((c + 1) % C, i));
    }
    for (int j = 0; j < half; ++j) {
        // Slot base 26 keeps these pairs clear of every planted chain, even
        // via knows-prefixed three-step walks through the chain midpoints.
        int c = j % 4, i = j / 4 + 26;
        add(c, i, (c + 1) % C, (i + 37) % P, false, "path", split_of(j));
    }

    for (int j = 0; j < half; ++j) {  // embedding: cluster-consistent vs crossing
        int c = j % 4, i = j / 4;
        add(c, i, c, (i + 19) % P, true, "embedding", split_of(j));
    }
    for (int j = 0; j < half; ++j) {
        int c = j % 4, i = j / 4 + 13;
        add(c, i, (c + 2) % C, (i + 19) % P, false, "embedding", split_of(j));
    }

    // Decoy via edges for every false-assertion subject, so "has a via edge"
    // is not an embedding-space proxy for the label. Targets land on even
    // slots outside the chain-midpoint band, which never carry via2, so no
    // new two-step chain appears and the path associations are unchanged.
    int span = (half - 1) / 4;
    for (int c = 0; c < 4; ++c) {
        for (int base : {13, 26}) {
            for (int i = base; i <= base + span; ++i)
                edge(fixture_entity_iri(c, i), via,
                     fixture_entity_iri(c, (i + 30 + (i % 2)) % P));
        }
    }

    fx.kg.finalize();

    // --- Corpus -----------------------------------------------------------
    // True text pairs are co-mentioned; false-pair endpoints only ever appear
    // in separate sentences; filler mentions one entity at a time.
    std::vector<std::string> sentences;
    const char* co_templates[] = {
        "%s signed a long term cooperation agreement with %s last spring",
        "analysts report that %s and %s share laboratories and field staff",
    };
    const char* solo_templates[] = {
        "%s opened a small observatory near the coast",         "%s published a survey of upland farming methods",
        "%s hosted a public lecture on glacier measurements",   "%s funded a archive of regional shipping records",
        "%s organized a workshop about soil chemistry",         "%s presented findings on migratory bird routes",
        "%s maintains a catalogue of historic bridges",         "%s released notes on early railway construction",
        "%s documented changes in river sediment",              "%s curated an exhibition of survey instruments",
    };
    char buf[256];
    for (const Pair& t : text_true) {
        for (const char* tpl : co_templates) {
            std::snprintf(buf, sizeof buf, tpl, fixture_entity_label(t.sc, t.si).c_str(),
                          fixture_entity_label(t.oc, t.oi).c_str());
            sentences.emplace_back(buf);
        }
    }
    std::size_t solo_idx = 0;
    for (const Pair& f : text_false) {
        std::snprintf(buf, sizeof buf, solo_templates[solo_idx++ % 10],
                      fixture_entity_label(f.sc, f.si).c_str());
        sentences.emplace_back(buf);
        std::snprintf(buf, sizeof buf, solo_templates[solo_idx++ % 10],
                      fixture_entity_label(f.oc, f.oi).c_str());
        sentences.emplace_back(buf);
    }
    for (int n = 0; n < spec.filler_sentences; ++n) {
        int c = n % C, i = (n / C) % P;
        std::snprintf(buf, sizeof buf, solo_templates[static_cast<std::size_t>(n) % 10],
                      fixture_entity_label(c, i).c_str());
        sentences.emplace_back(buf);
    }

    std::vector<CorpusDocument> docs(static_cast<std::size_t>(spec.docs));
    for (int d = 0; d < spec.docs; ++d) {
        docs[static_cast<std::size_t>(d)].doc_id =
            "doc" + std::string(d < 10 ? "0" : "") + std::to_string(d);
        docs[static_cast<std::size_t>(d)].source_id = "src" + std::to_string(d % 6);
    }
    for (std::size_t s = 0; s < sentences.size(); ++s)
        docs[s % docs.size()].sentences.push_back(sentences[s]);
    for (int d = 0; d < spec.docs; ++d) {
        CorpusDocument& doc = docs[static_cast<std::size_t>(d)];
        doc.out_links.push_back(docs[static_cast<std::size_t>((d + 1) % spec.docs)].doc_id);
        doc.out_links.push_back(docs[static_cast<std::size_t>((d * 7 + 3) % spec.docs)].doc_id);
        if (d != 0) doc.out_links.push_back(docs[0].doc_id);
    }
    for (CorpusDocument& doc : docs) fx.corpus.add_document(std::move(doc));
    fx.corpus.finalize();

    return fx;
}

// Writes kg/ (triples + labels), corpus.jsonl, assertions.jsonl, config.toml.
inline void write_fixture(const FixtureData& fx, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    save_kg_store(fx.kg, dir / "kg");
    {
        std::ofstream out(dir / "corpus.jsonl");
        if (!out) throw ConfigError("cannot write " + (dir / "corpus.jsonl").string());
        save_corpus_jsonl(fx.corpus, out);
    }
    save_assertions_jsonl(fx.assertions, (dir / "assertions.jsonl").string());
    save_config_toml(fx.config, (dir / "config.toml").string());
}

}  // namespace hybridfc
