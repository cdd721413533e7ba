#pragma once
// RDF term model. Every distinct term (IRI, blank node, literal) is interned
// once and addressed by a dense 32-bit id; triples are three ids.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "hybridfc/errors.hpp"

namespace hybridfc {

using TermId = std::uint32_t;
inline constexpr TermId kNoTerm = 0xffffffffu;

enum class TermKind : std::uint8_t { Iri, Blank, Literal };

struct Term {
    TermKind kind = TermKind::Iri;
    std::string lex;            // IRI string, blank-node label, or literal value
    std::string lang;           // literal language tag, empty if none
    TermId datatype = kNoTerm;  // literal datatype IRI, kNoTerm if none
};

struct Triple {
    TermId subject = kNoTerm;
    TermId predicate = kNoTerm;
    TermId object = kNoTerm;

    bool operator==(const Triple&) const = default;
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        h = (h ^ t.subject) * 0x100000001b3ULL;
        h = (h ^ t.predicate) * 0x100000001b3ULL;
        h = (h ^ t.object) * 0x100000001b3ULL;
        return static_cast<std::size_t>(h);
    }
};

inline std::string escape_literal(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

// Interner with canonical N-Triples rendering as the dedup key.
class TermTable {
public:
    TermId intern(Term term) {
        std::string key = render(term);
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        TermId id = static_cast<TermId>(terms_.size());
        terms_.push_back(std::move(term));
        rendered_.push_back(key);
        index_.emplace(std::move(key), id);
        return id;
    }

    TermId intern_iri(std::string iri) {
        if (iri.empty()) throw ContractViolation("empty IRI");
        return intern(Term{TermKind::Iri, std::move(iri), {}, kNoTerm});
    }

    // Lookup without inserting; kNoTerm when absent.
    TermId find(const Term& term) const {
        auto it = index_.find(render(term));
        return it == index_.end() ? kNoTerm : it->second;
    }

    TermId find_iri(const std::string& iri) const {
        return find(Term{TermKind::Iri, iri, {}, kNoTerm});
    }

    const Term& term(TermId id) const { return terms_[id]; }
    const std::string& rendered(TermId id) const { return rendered_[id]; }
    std::size_t size() const { return terms_.size(); }

    bool is_iri(TermId id) const { return terms_[id].kind == TermKind::Iri; }

    // Canonical N-Triples token for a term.
    std::string render(const Term& t) const {
        switch (t.kind) {
            case TermKind::Iri: return "<" + t.lex + ">";
            case TermKind::Blank: return "_:" + t.lex;
            case TermKind::Literal: {
                std::string out = "\"" + escape_literal(t.lex) + "\"";
                if (!t.lang.empty()) {
                    out += "@" + t.lang;
                } else if (t.datatype != kNoTerm) {
                    out += "^^" + rendered_[t.datatype];
                }
                return out;
            }
        }
        return {};
    }

private:
    std::vector<Term> terms_;
    std::vector<std::string> rendered_;
    std::unordered_map<std::string, TermId> index_;
};

// Human surface form of an IRI: text after the last '/' or '#', with
// underscores turned into spaces.
inline std::string iri_local_name(const std::string& iri) {
    std::size_t pos = iri.find_last_of("/#");
    std::string local = (pos == std::string::npos) ? iri : iri.substr(pos + 1);
    for (char& c : local) {
        if (c == '_') c = ' ';
    }
    return local;
}

}  // namespace hybridfc
