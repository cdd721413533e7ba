#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "hybridfc/kg.hpp"
#include "hybridfc/ntriples.hpp"
#include "hybridfc/rng.hpp"

using namespace hybridfc;

namespace {

std::string iri_token(int n) {
    return "<http://example.org/e" + std::to_string(n) + ">";
}

std::string pred_token(int n) {
    return "<http://example.org/p" + std::to_string(n) + ">";
}

struct RawTriple {
    std::string s, p, o;
    std::string line() const { return s + " " + p + " " + o + " ."; }
    bool operator<(const RawTriple& other) const {
        return line() < other.line();
    }
};

std::vector<RawTriple> random_raw_triples(Rng& rng, int n, int entities, int preds) {
    std::vector<RawTriple> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        out.push_back({iri_token(static_cast<int>(rng.next_below(entities))),
                       pred_token(static_cast<int>(rng.next_below(preds))),
                       iri_token(static_cast<int>(rng.next_below(entities)))});
    }
    return out;
}

std::string join_lines(const std::vector<RawTriple>& ts) {
    std::string text;
    for (const auto& t : ts) text += t.line() + "\n";
    return text;
}

// Canonical rendering of a parsed graph's triples, for set comparisons.
std::set<std::string> triple_strings(const KnowledgeGraph& kg) {
    std::set<std::string> out;
    for (const Triple& t : kg.triples()) {
        out.insert(kg.terms().rendered(t.subject) + " " +
                   kg.terms().rendered(t.predicate) + " " +
                   kg.terms().rendered(t.object) + " .");
    }
    return out;
}

// Oracle: neighbors by linear scan over the raw triple list.
std::vector<std::pair<std::string, std::string>> scan_neighbors(
    const std::vector<RawTriple>& ts, const std::string& entity, Direction dir) {
    std::set<std::pair<std::string, std::string>> found;
    for (const auto& t : ts) {
        if (dir == Direction::Fwd && t.s == entity) found.insert({t.p, t.o});
        if (dir == Direction::Inv && t.o == entity) found.insert({t.p, t.s});
    }
    return {found.begin(), found.end()};
}

std::string strip_angle(const std::string& token) {
    return token.substr(1, token.size() - 2);
}

}  // namespace

TEST(NtParser, MinimalLine) {
    KnowledgeGraph kg = parse_ntriples("<a> <p> <b> .");
    ASSERT_EQ(kg.size(), 1u);
    EXPECT_TRUE(kg.contains("a", "p", "b"));
}

TEST(NtParser, EmptyStream) {
    KnowledgeGraph kg = parse_ntriples("");
    EXPECT_EQ(kg.size(), 0u);
    EXPECT_TRUE(kg.entities().empty());
}

TEST(NtParser, CommentsAndBlankLines) {
    KnowledgeGraph kg = parse_ntriples(
        "# header comment\n\n<a> <p> <b> . # trailing comment\n   \n");
    EXPECT_EQ(kg.size(), 1u);
}

TEST(NtParser, DuplicatesAgainstSetOracle) {
    Rng rng(41);
    // 7 distinct lines plus 3 repeats = 10 input lines.
    std::vector<RawTriple> distinct;
    std::set<std::string> seen;
    while (distinct.size() < 7) {
        RawTriple t = random_raw_triples(rng, 1, 20, 4)[0];
        if (seen.insert(t.line()).second) distinct.push_back(t);
    }
    std::vector<RawTriple> lines = distinct;
    for (int i = 0; i < 3; ++i)
        lines.push_back(distinct[rng.next_below(distinct.size())]);
    rng.shuffle(lines);

    // Oracle: dedup of string-normalized lines.
    std::set<std::string> oracle;
    for (const auto& t : lines) oracle.insert(t.line());
    ASSERT_EQ(oracle.size(), 7u);

    NtReport report;
    KnowledgeGraph kg = parse_ntriples(join_lines(lines), {}, &report);
    EXPECT_EQ(kg.size(), oracle.size());
    EXPECT_EQ(report.triples, 7u);
    EXPECT_EQ(report.duplicates, 3u);
    EXPECT_EQ(triple_strings(kg), oracle);
}

TEST(NtParser, LiteralForms) {
    KnowledgeGraph kg = parse_ntriples(
        "<a> <p> \"plain\" .\n"
        "<a> <p> \"hallo\"@de .\n"
        "<a> <p> \"42\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n"
        "<a> <p> \"tab\\there \\\"q\\\" \\\\ \\n\" .\n"
        "<a> <p> \"\\u00e9\\U0001F600\" .\n");
    EXPECT_EQ(kg.size(), 5u);
    // Escaped characters decode to their raw bytes.
    bool found_escaped = false;
    for (const Triple& t : kg.triples()) {
        const Term& o = kg.terms().term(t.object);
        if (o.kind == TermKind::Literal && o.lex == "tab\there \"q\" \\ \n")
            found_escaped = true;
    }
    EXPECT_TRUE(found_escaped);
}

TEST(NtParser, BlankNodes) {
    KnowledgeGraph kg = parse_ntriples("_:b1 <p> _:b2 .\n<a> <p> _:b1 .\n");
    EXPECT_EQ(kg.size(), 2u);
    // Blank nodes are stored but never indexed as entities.
    for (TermId e : kg.entities())
        EXPECT_EQ(kg.terms().term(e).kind, TermKind::Iri);
}

TEST(NtParser, MalformedLineLocation) {
    try {
        parse_ntriples("<a> <p> <b> .\n<a> <p> junk .\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 2u);
        EXPECT_GT(e.column, 0u);
    }
}

TEST(NtParser, SkipAndReportMode) {
    NtOptions opt;
    opt.fail_fast = false;
    NtReport report;
    KnowledgeGraph kg = parse_ntriples(
        "<a> <p> <b> .\nbroken\n<a> <p> <c> .\n<x> <y>\n", opt, &report);
    EXPECT_EQ(kg.size(), 2u);
    ASSERT_EQ(report.issues.size(), 2u);
    EXPECT_EQ(report.issues[0].line, 2u);
    EXPECT_EQ(report.issues[1].line, 4u);
}

TEST(NtParser, RejectsWhitespaceInIri) {
    EXPECT_THROW(parse_ntriples("<a b> <p> <c> ."), ParseError);
}

TEST(NtParser, RoundTripRandomGraph) {
    Rng rng(42);
    std::vector<RawTriple> raw = random_raw_triples(rng, 80, 25, 6);
    KnowledgeGraph kg = parse_ntriples(join_lines(raw) +
                                       "<a> <p> \"esc \\\"x\\\" \\n\"@en .\n");
    std::ostringstream out;
    kg.serialize(out);
    KnowledgeGraph again = parse_ntriples(out.str());
    EXPECT_EQ(triple_strings(kg), triple_strings(again));
}

TEST(KgStore, NeighborsTrivial) {
    KnowledgeGraph kg = parse_ntriples("<a> <p> <b> .");
    TermId a = kg.terms().find_iri("a");
    TermId b = kg.terms().find_iri("b");
    TermId p = kg.terms().find_iri("p");
    ASSERT_NE(a, kNoTerm);
    auto fwd = kg.neighbors(a, Direction::Fwd);
    ASSERT_EQ(fwd.size(), 1u);
    EXPECT_EQ(fwd[0].predicate, p);
    EXPECT_EQ(fwd[0].node, b);
    auto inv = kg.neighbors(b, Direction::Inv);
    ASSERT_EQ(inv.size(), 1u);
    EXPECT_EQ(inv[0].predicate, p);
    EXPECT_EQ(inv[0].node, a);
    EXPECT_TRUE(kg.neighbors(p, Direction::Fwd).empty());
}

TEST(KgStore, NeighborsMatchScanOracle) {
    Rng rng(7);
    std::vector<RawTriple> raw = random_raw_triples(rng, 50, 12, 4);
    KnowledgeGraph kg = parse_ntriples(join_lines(raw));
    for (int e = 0; e < 12; ++e) {
        std::string token = iri_token(e);
        TermId id = kg.terms().find_iri(strip_angle(token));
        for (Direction dir : {Direction::Fwd, Direction::Inv}) {
            auto oracle = scan_neighbors(raw, token, dir);
            std::vector<std::pair<std::string, std::string>> got;
            if (id != kNoTerm) {
                for (const Edge& edge : kg.neighbors(id, dir))
                    got.push_back({kg.terms().rendered(edge.predicate),
                                   kg.terms().rendered(edge.node)});
            }
            std::sort(got.begin(), got.end());
            EXPECT_EQ(got, oracle) << "entity " << token << " dir "
                                   << (dir == Direction::Fwd ? "fwd" : "inv");
        }
    }
}

TEST(KgStore, ContainsTrivial) {
    KnowledgeGraph kg = parse_ntriples("<a> <p> <b> .");
    EXPECT_TRUE(kg.contains("a", "p", "b"));
    EXPECT_FALSE(kg.contains("a", "p", "c"));
    EXPECT_FALSE(kg.contains("zzz", "p", "b"));
}

TEST(KgStore, ContainsMatchesSetOracle) {
    Rng rng(99);
    std::vector<RawTriple> raw = random_raw_triples(rng, 120, 15, 5);
    KnowledgeGraph kg = parse_ntriples(join_lines(raw));
    std::set<std::string> oracle;
    for (const auto& t : raw) oracle.insert(t.line());
    for (int i = 0; i < 1000; ++i) {
        RawTriple probe = random_raw_triples(rng, 1, 15, 5)[0];
        bool expect = oracle.count(probe.line()) > 0;
        EXPECT_EQ(kg.contains(strip_angle(probe.s), strip_angle(probe.p),
                              strip_angle(probe.o)),
                  expect)
            << probe.line();
    }
}

TEST(KgStore, FwdInvSymmetryProperty) {
    Rng rng(13);
    std::vector<RawTriple> raw = random_raw_triples(rng, 200, 30, 8);
    KnowledgeGraph kg = parse_ntriples(join_lines(raw));
    EXPECT_TRUE(kg.indices_consistent());
    for (const Triple& t : kg.triples()) {
        auto fwd = kg.neighbors(t.subject, Direction::Fwd);
        auto inv = kg.neighbors(t.object, Direction::Inv);
        EXPECT_TRUE(std::find(fwd.begin(), fwd.end(),
                              Edge{t.predicate, t.object}) != fwd.end());
        EXPECT_TRUE(std::find(inv.begin(), inv.end(),
                              Edge{t.predicate, t.subject}) != inv.end());
    }
}

TEST(KgStore, PredicateCountsSumToTripleCount) {
    Rng rng(17);
    std::vector<RawTriple> raw = random_raw_triples(rng, 150, 20, 6);
    KnowledgeGraph kg = parse_ntriples(join_lines(raw));
    std::size_t total = 0;
    for (const auto& [pred, n] : kg.predicate_counts()) total += n;
    EXPECT_EQ(total, kg.size());
}

TEST(KgStore, StepIndexMatchesNeighbors) {
    Rng rng(23);
    std::vector<RawTriple> raw = random_raw_triples(rng, 100, 14, 5);
    KnowledgeGraph kg = parse_ntriples(join_lines(raw));
    for (TermId e : kg.entities()) {
        for (Direction dir : {Direction::Fwd, Direction::Inv}) {
            std::set<std::pair<TermId, TermId>> from_neighbors;
            for (const Edge& edge : kg.neighbors(e, dir))
                from_neighbors.insert({edge.predicate, edge.node});
            std::set<std::pair<TermId, TermId>> from_step;
            for (TermId p : kg.predicates())
                for (TermId n : kg.step(e, p, dir)) from_step.insert({p, n});
            EXPECT_EQ(from_neighbors, from_step);
        }
    }
}

TEST(KgStore, LabelFallbacks) {
    KnowledgeGraph kg = parse_ntriples(
        "<http://ex.org/Barack_Obama> <http://ex.org/knows> <http://ex.org/X#Some_One> .\n"
        "<http://ex.org/Barack_Obama> <http://www.w3.org/2000/01/rdf-schema#label> "
        "\"Barack Obama\"@en .\n");
    TermId obama = kg.terms().find_iri("http://ex.org/Barack_Obama");
    TermId someone = kg.terms().find_iri("http://ex.org/X#Some_One");
    EXPECT_EQ(kg.label(obama), "Barack Obama");
    // No rdfs:label: local name after the last '/' or '#', underscores to spaces.
    EXPECT_EQ(kg.label(someone), "Some One");
    kg.set_label(someone, "Custom");
    EXPECT_EQ(kg.label(someone), "Custom");
}

TEST(KgStore, GzipRoundTrip) {
    std::string text = "<a> <p> <b> .\n<b> <p> <c> .\n";
    auto dir = std::filesystem::temp_directory_path() / "hybridfc_kg_gz_test";
    std::filesystem::create_directories(dir);
    auto path = dir / "kg.nt.gz";
    gzFile gz = gzopen(path.string().c_str(), "wb");
    ASSERT_NE(gz, nullptr);
    gzwrite(gz, text.data(), static_cast<unsigned>(text.size()));
    gzclose(gz);
    KnowledgeGraph kg = load_ntriples_file(path);
    EXPECT_EQ(kg.size(), 2u);
    EXPECT_TRUE(kg.contains("b", "p", "c"));
    std::filesystem::remove_all(dir);
}

TEST(KgStore, StoreDirectoryRoundTrip) {
    KnowledgeGraph kg = parse_ntriples(
        "<http://ex.org/a> <http://ex.org/p> <http://ex.org/b> .\n"
        "<http://ex.org/a> <http://www.w3.org/2000/01/rdf-schema#label> \"Anna\" .\n");
    kg.set_label(kg.terms().find_iri("http://ex.org/b"), "Bee");
    auto dir = std::filesystem::temp_directory_path() / "hybridfc_kg_store_test";
    std::filesystem::remove_all(dir);
    save_kg_store(kg, dir);
    KnowledgeGraph again = load_kg_store(dir);
    EXPECT_EQ(triple_strings(kg), triple_strings(again));
    EXPECT_EQ(again.label(again.terms().find_iri("http://ex.org/a")), "Anna");
    EXPECT_EQ(again.label(again.terms().find_iri("http://ex.org/b")), "Bee");
    std::filesystem::remove_all(dir);
}
