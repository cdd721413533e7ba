#pragma once
// Line-oriented N-Triples reader/writer covering the subset this toolkit
// needs: IRIs, blank nodes, plain/typed/language-tagged literals, comments.
// Malformed lines are reported with their 1-based line and column; the caller
// chooses between fail-fast and skip-and-report.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "hybridfc/errors.hpp"
#include "hybridfc/kg.hpp"

namespace hybridfc {

struct NtOptions {
    bool fail_fast = true;
};

struct NtIssue {
    std::size_t line = 0;
    std::size_t column = 0;
    std::string message;
};

struct NtReport {
    std::vector<NtIssue> issues;
    std::size_t lines = 0;
    std::size_t triples = 0;
    std::size_t duplicates = 0;
};

namespace detail {

class NtLineParser {
public:
    NtLineParser(const std::string& line, std::size_t lineno, TermTable& terms)
        : s_(line), lineno_(lineno), terms_(terms) {}

    // Returns false for blank/comment-only lines.
    bool parse(Triple& out) {
        skip_ws();
        if (eof() || peek() == '#') return false;
        out.subject = parse_subject();
        require_ws();
        out.predicate = parse_predicate();
        require_ws();
        out.object = parse_object();
        skip_ws();
        expect('.');
        skip_ws();
        if (!eof() && peek() != '#') fail("trailing characters after '.'");
        return true;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, lineno_, pos_ + 1);
    }

    bool eof() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }
    char take() { return s_[pos_++]; }

    void expect(char c) {
        if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    static bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\r'; }

    void skip_ws() {
        while (!eof() && is_ws(peek())) ++pos_;
    }

    void require_ws() {
        if (eof() || !is_ws(peek())) fail("expected whitespace");
        skip_ws();
    }

    TermId parse_subject() {
        if (eof()) fail("missing subject");
        if (peek() == '<') return parse_iri();
        if (peek() == '_') return parse_blank();
        fail("subject must be an IRI or blank node");
    }

    TermId parse_predicate() {
        if (eof() || peek() != '<') fail("predicate must be an IRI");
        return parse_iri();
    }

    TermId parse_object() {
        if (eof()) fail("missing object");
        if (peek() == '<') return parse_iri();
        if (peek() == '_') return parse_blank();
        if (peek() == '"') return parse_literal();
        fail("object must be an IRI, blank node, or literal");
    }

    TermId parse_iri() {
        expect('<');
        std::string iri;
        while (!eof() && peek() != '>') {
            char c = take();
            if (c == ' ' || c == '\t') fail("whitespace inside IRI");
            iri += c;
        }
        expect('>');
        if (iri.empty()) fail("empty IRI");
        return terms_.intern(Term{TermKind::Iri, std::move(iri), {}, kNoTerm});
    }

    TermId parse_blank() {
        expect('_');
        expect(':');
        std::string name;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                          peek() == '_' || peek() == '-' || peek() == '.')) {
            name += take();
        }
        if (name.empty()) fail("empty blank node label");
        return terms_.intern(Term{TermKind::Blank, std::move(name), {}, kNoTerm});
    }

    TermId parse_literal() {
        expect('"');
        std::string value;
        while (true) {
            if (eof()) fail("unterminated literal");
            char c = take();
            if (c == '"') break;
            if (c == '\\') {
                value += parse_escape();
            } else {
                value += c;
            }
        }
        Term term{TermKind::Literal, std::move(value), {}, kNoTerm};
        if (!eof() && peek() == '@') {
            ++pos_;
            std::string lang;
            while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                              peek() == '-')) {
                lang += take();
            }
            if (lang.empty()) fail("empty language tag");
            term.lang = std::move(lang);
        } else if (!eof() && peek() == '^') {
            ++pos_;
            expect('^');
            term.datatype = parse_iri();
        }
        return terms_.intern(std::move(term));
    }

    std::string parse_escape() {
        if (eof()) fail("dangling escape");
        char c = take();
        switch (c) {
            case 't': return "\t";
            case 'b': return "\b";
            case 'n': return "\n";
            case 'r': return "\r";
            case 'f': return "\f";
            case '"': return "\"";
            case '\'': return "'";
            case '\\': return "\\";
            case 'u': return encode_utf8(parse_hex(4));
            case 'U': return encode_utf8(parse_hex(8));
        }
        fail(std::string("unknown escape '\\") + c + "'");
    }

    std::uint32_t parse_hex(int digits) {
        std::uint32_t cp = 0;
        for (int i = 0; i < digits; ++i) {
            if (eof()) fail("truncated \\u escape");
            char c = take();
            cp <<= 4;
            if (c >= '0' && c <= '9') cp |= static_cast<std::uint32_t>(c - '0');
            else if (c >= 'a' && c <= 'f') cp |= static_cast<std::uint32_t>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F') cp |= static_cast<std::uint32_t>(c - 'A' + 10);
            else fail("bad hex digit in escape");
        }
        return cp;
    }

    static std::string encode_utf8(std::uint32_t cp) {
        std::string out;
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xc0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3f));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xe0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
            out += static_cast<char>(0x80 | (cp & 0x3f));
        } else {
            out += static_cast<char>(0xf0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3f));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
            out += static_cast<char>(0x80 | (cp & 0x3f));
        }
        return out;
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    std::size_t lineno_;
    TermTable& terms_;
};

}  // namespace detail

// Parses line-oriented N-Triples from a stream. Duplicate triples are
// deduplicated; well-formed lines each yield exactly one triple.
inline KnowledgeGraph parse_ntriples(std::istream& in, const NtOptions& opt = {},
                                     NtReport* report = nullptr) {
    KnowledgeGraph kg;
    std::string line;
    std::size_t lineno = 0;
    NtReport local;
    NtReport& rep = report ? *report : local;
    while (std::getline(in, line)) {
        ++lineno;
        ++rep.lines;
        try {
            Triple t;
            detail::NtLineParser parser(line, lineno, kg.terms());
            if (!parser.parse(t)) continue;
            if (kg.add_triple(t)) {
                ++rep.triples;
            } else {
                ++rep.duplicates;
            }
        } catch (const ParseError& e) {
            if (opt.fail_fast) throw;
            rep.issues.push_back({e.line, e.column, e.what()});
        }
    }
    kg.finalize();
    return kg;
}

inline KnowledgeGraph parse_ntriples(const std::string& text, const NtOptions& opt = {},
                                     NtReport* report = nullptr) {
    std::istringstream in(text);
    return parse_ntriples(in, opt, report);
}

// Reads a whole file, transparently inflating gzip (detected by magic bytes).
inline std::string read_file_maybe_gzip(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::string raw((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    if (raw.size() < 2 || static_cast<unsigned char>(raw[0]) != 0x1f ||
        static_cast<unsigned char>(raw[1]) != 0x8b) {
        return raw;
    }
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK)
        throw ConfigError("zlib init failed for " + path.string());
    std::string out;
    zs.next_in = reinterpret_cast<Bytef*>(raw.data());
    zs.avail_in = static_cast<uInt>(raw.size());
    char buf[1 << 16];
    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw ConfigError("corrupt gzip stream: " + path.string());
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
    } while (rc != Z_STREAM_END);
    inflateEnd(&zs);
    return out;
}

inline KnowledgeGraph load_ntriples_file(const std::filesystem::path& path,
                                         const NtOptions& opt = {},
                                         NtReport* report = nullptr) {
    return parse_ntriples(read_file_maybe_gzip(path), opt, report);
}

// KG store directory: kg.nt plus labels.tsv with explicit label overrides.
inline void save_kg_store(const KnowledgeGraph& kg, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream nt(dir / "kg.nt");
    kg.serialize(nt);
    std::vector<std::pair<std::string, std::string>> rows;
    for (const auto& [id, label] : kg.label_overrides())
        rows.emplace_back(kg.terms().term(id).lex, label);
    std::sort(rows.begin(), rows.end());
    std::ofstream tsv(dir / "labels.tsv");
    for (const auto& [iri, label] : rows) tsv << iri << '\t' << label << '\n';
}

inline void load_labels_tsv(KnowledgeGraph& kg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw ParseError("labels row needs 'iri<TAB>label'", lineno, 1);
        std::string iri = line.substr(0, tab);
        kg.set_label(kg.terms().intern_iri(iri), line.substr(tab + 1));
    }
}

inline KnowledgeGraph load_kg_store(const std::filesystem::path& dir) {
    KnowledgeGraph kg = load_ntriples_file(dir / "kg.nt");
    if (std::filesystem::exists(dir / "labels.tsv"))
        load_labels_tsv(kg, dir / "labels.tsv");
    return kg;
}

}  // namespace hybridfc
