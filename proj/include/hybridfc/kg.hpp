#pragma once
// Indexed RDF triple store. Ingestion is single-writer (add_triple, then
// finalize); afterwards the graph is immutable and safe for any number of
// concurrent readers. Blank nodes and literals are stored and served by
// contains()/serialize(), but only IRI-to-IRI edges enter the traversal
// indices used by path search.

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hybridfc/term.hpp"

namespace hybridfc {

inline const std::string kRdfsLabel = "http://www.w3.org/2000/01/rdf-schema#label";

enum class Direction { Fwd, Inv };

struct Edge {
    TermId predicate = kNoTerm;
    TermId node = kNoTerm;

    bool operator==(const Edge&) const = default;
    auto operator<=>(const Edge&) const = default;
};

class KnowledgeGraph {
public:
    TermTable& terms() { return terms_; }
    const TermTable& terms() const { return terms_; }

    // Returns false when the triple is a duplicate.
    bool add_triple(const Triple& t) {
        if (!triple_set_.insert(t).second) return false;
        triples_.push_back(t);
        predicate_counts_[t.predicate]++;
        const bool s_iri = terms_.is_iri(t.subject);
        const bool o_iri = terms_.is_iri(t.object);
        if (s_iri && o_iri) {
            grow(std::max(t.subject, t.object));
            fwd_adj_[t.subject].push_back({t.predicate, t.object});
            inv_adj_[t.object].push_back({t.predicate, t.subject});
            sp_objects_[pack(t.subject, t.predicate)].push_back(t.object);
            op_subjects_[pack(t.object, t.predicate)].push_back(t.subject);
        }
        finalized_ = false;
        return true;
    }

    // Sorts adjacency, collects the entity/predicate sets and extracts
    // rdfs:label surface forms. Must be called once after ingestion.
    void finalize() {
        for (auto& edges : fwd_adj_) std::sort(edges.begin(), edges.end());
        for (auto& edges : inv_adj_) std::sort(edges.begin(), edges.end());
        for (auto& [key, nodes] : sp_objects_) std::sort(nodes.begin(), nodes.end());
        for (auto& [key, nodes] : op_subjects_) std::sort(nodes.begin(), nodes.end());

        std::unordered_set<TermId> ents;
        std::unordered_set<TermId> preds;
        TermId label_pred = terms_.find_iri(kRdfsLabel);
        for (const Triple& t : triples_) {
            if (terms_.is_iri(t.subject)) ents.insert(t.subject);
            if (terms_.is_iri(t.object)) ents.insert(t.object);
            preds.insert(t.predicate);
            if (t.predicate == label_pred &&
                terms_.term(t.object).kind == TermKind::Literal) {
                rdfs_labels_.try_emplace(t.subject, terms_.term(t.object).lex);
            }
        }
        entities_.assign(ents.begin(), ents.end());
        std::sort(entities_.begin(), entities_.end());
        predicates_.assign(preds.begin(), preds.end());
        std::sort(predicates_.begin(), predicates_.end());
        finalized_ = true;
    }

    bool contains(const Triple& t) const { return triple_set_.count(t) > 0; }

    bool contains(const std::string& s, const std::string& p, const std::string& o) const {
        TermId si = terms_.find_iri(s);
        TermId pi = terms_.find_iri(p);
        TermId oi = terms_.find_iri(o);
        if (si == kNoTerm || pi == kNoTerm || oi == kNoTerm) return false;
        return contains({si, pi, oi});
    }

    // Exhaustive, duplicate-free entity-to-entity edge list. Unknown or
    // non-entity ids yield an empty list.
    const std::vector<Edge>& neighbors(TermId entity, Direction dir) const {
        const auto& adj = dir == Direction::Fwd ? fwd_adj_ : inv_adj_;
        if (entity >= adj.size()) return kEmptyEdges;
        return adj[entity];
    }

    // Entities reachable from `node` over `predicate` in one step.
    const std::vector<TermId>& step(TermId node, TermId predicate, Direction dir) const {
        const auto& index = dir == Direction::Fwd ? sp_objects_ : op_subjects_;
        auto it = index.find(pack(node, predicate));
        if (it == index.end()) return kEmptyNodes;
        return it->second;
    }

    const std::vector<Triple>& triples() const { return triples_; }
    std::size_t size() const { return triples_.size(); }

    const std::vector<TermId>& entities() const { return entities_; }
    const std::vector<TermId>& predicates() const { return predicates_; }
    const std::unordered_map<TermId, std::size_t>& predicate_counts() const {
        return predicate_counts_;
    }

    void set_label(TermId entity, const std::string& label) {
        label_overrides_[entity] = label;
    }

    // rdfs:label wins over the IRI local name; explicit overrides win over both.
    std::string label(TermId entity) const {
        if (auto it = label_overrides_.find(entity); it != label_overrides_.end())
            return it->second;
        if (auto it = rdfs_labels_.find(entity); it != rdfs_labels_.end())
            return it->second;
        const Term& t = terms_.term(entity);
        if (t.kind == TermKind::Iri) return iri_local_name(t.lex);
        return t.lex;
    }

    const std::unordered_map<TermId, std::string>& label_overrides() const {
        return label_overrides_;
    }

    void serialize(std::ostream& out) const {
        for (const Triple& t : triples_) {
            out << terms_.rendered(t.subject) << ' ' << terms_.rendered(t.predicate)
                << ' ' << terms_.rendered(t.object) << " .\n";
        }
    }

    // Debug check that the forward and inverse indices describe the same edge
    // set as the triple list.
    bool indices_consistent() const {
        std::size_t fwd_edges = 0;
        std::size_t iri_pairs = 0;
        for (const auto& edges : fwd_adj_) fwd_edges += edges.size();
        for (const Triple& t : triples_) {
            if (!terms_.is_iri(t.subject) || !terms_.is_iri(t.object)) continue;
            ++iri_pairs;
            bool in_fwd = false;
            for (const Edge& e : neighbors(t.subject, Direction::Fwd))
                if (e == Edge{t.predicate, t.object}) in_fwd = true;
            bool in_inv = false;
            for (const Edge& e : neighbors(t.object, Direction::Inv))
                if (e == Edge{t.predicate, t.subject}) in_inv = true;
            if (!in_fwd || !in_inv) return false;
        }
        return fwd_edges == iri_pairs;
    }

private:
    static std::uint64_t pack(TermId a, TermId b) {
        return (static_cast<std::uint64_t>(a) << 32) | b;
    }

    void grow(TermId id) {
        if (fwd_adj_.size() <= id) {
            fwd_adj_.resize(id + 1);
            inv_adj_.resize(id + 1);
        }
    }

    inline static const std::vector<Edge> kEmptyEdges{};
    inline static const std::vector<TermId> kEmptyNodes{};

    TermTable terms_;
    std::vector<Triple> triples_;
    std::unordered_set<Triple, TripleHash> triple_set_;
    std::vector<std::vector<Edge>> fwd_adj_;
    std::vector<std::vector<Edge>> inv_adj_;
    std::unordered_map<std::uint64_t, std::vector<TermId>> sp_objects_;
    std::unordered_map<std::uint64_t, std::vector<TermId>> op_subjects_;
    std::unordered_map<TermId, std::size_t> predicate_counts_;
    std::unordered_map<TermId, std::string> rdfs_labels_;
    std::unordered_map<TermId, std::string> label_overrides_;
    std::vector<TermId> entities_;
    std::vector<TermId> predicates_;
    bool finalized_ = false;
};

}  // namespace hybridfc
