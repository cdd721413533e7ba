#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "hybridfc/embedding.hpp"
#include "hybridfc/embedding_train.hpp"
#include "hybridfc/ntriples.hpp"
#include "hybridfc/rng.hpp"
#include "oracles.hpp"

using namespace hybridfc;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -2.0,
                               double hi = 2.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

}  // namespace

TEST(Scoring, TranseTrivial) {
    std::vector<double> s{1, 0}, p{0, 1}, o{1, 1};
    EXPECT_DOUBLE_EQ(score_transe(s, p, o), 0.0);
    std::vector<double> z{0, 0};
    EXPECT_DOUBLE_EQ(score_transe(z, z, z), 0.0);
    std::vector<double> s2{1, 2}, p2{3, 4}, o2{0, 0};
    EXPECT_DOUBLE_EQ(score_transe(s2, p2, o2), std::sqrt(4.0 * 4 + 6.0 * 6));
}

TEST(Scoring, TranseZeroIffExact) {
    std::vector<double> s{0.3, -1.2, 4.0}, p{1.0, 0.5, -2.0};
    std::vector<double> o{1.3, -0.7, 2.0};
    EXPECT_DOUBLE_EQ(score_transe(s, p, o), 0.0);
    o[2] += 1e-9;
    EXPECT_GT(score_transe(s, p, o), 0.0);
}

TEST(Scoring, ComplexTrivial) {
    // q=4, all components 1+0i: layout [1,1,1,1, 0,0,0,0].
    std::vector<double> ones{1, 1, 1, 1, 0, 0, 0, 0};
    EXPECT_DOUBLE_EQ(score_complex(ones, ones, ones), 4.0);
    // Real s,p and purely imaginary o contribute nothing to the real part.
    std::vector<double> real_sp{0.7, -1.1, 0, 0};
    std::vector<double> imag_o{0, 0, 2.0, -3.0};
    EXPECT_DOUBLE_EQ(score_complex(real_sp, real_sp, imag_o), 0.0);
}

TEST(Scoring, QmultTrivial) {
    // Identity quaternion relation: score reduces to the real dot product.
    std::vector<double> s{0.5, -1.0, 2.0, 0.25, 1.5, 0.5, -0.5, 3.0};
    std::vector<double> id{1, 0, 0, 0, 1, 0, 0, 0};
    std::vector<double> o{2.0, 1.0, -1.0, 4.0, 0.5, -2.0, 1.0, 0.0};
    double dot = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) dot += s[i] * o[i];
    EXPECT_NEAR(score_qmult(s, id, o), dot, 1e-12);

    std::vector<double> zero(8, 0.0);
    EXPECT_DOUBLE_EQ(score_qmult(zero, id, o), 0.0);

    // i ⊗ j = k; dotted with k gives 1.
    std::vector<double> qi{0, 1, 0, 0}, qj{0, 0, 1, 0}, qk{0, 0, 0, 1};
    EXPECT_DOUBLE_EQ(score_qmult(qi, qj, qk), 1.0);
    EXPECT_DOUBLE_EQ(oracle::qmult_score(qi, qj, qk), 1.0);
}

TEST(Scoring, LengthMismatchRejected) {
    std::vector<double> a{1, 2}, b{1, 2, 3};
    EXPECT_THROW(score_transe(a, b, a), ContractViolation);
    EXPECT_THROW(score_complex(a, a, b), ContractViolation);
    EXPECT_THROW(score_qmult(b, b, b), ContractViolation);  // not multiple of 4
}

TEST(Scoring, RandomVectorsMatchOracles) {
    Rng rng(2024);
    for (int it = 0; it < 1000; ++it) {
        std::size_t q = 1 + rng.next_below(6);
        auto s1 = random_vec(rng, q), p1 = random_vec(rng, q), o1 = random_vec(rng, q);
        EXPECT_NEAR(score_transe(s1, p1, o1), oracle::transe(s1, p1, o1), 1e-10);
        auto s2 = random_vec(rng, 2 * q), p2 = random_vec(rng, 2 * q),
             o2 = random_vec(rng, 2 * q);
        EXPECT_NEAR(score_complex(s2, p2, o2), oracle::complex_score(s2, p2, o2), 1e-10);
        auto s3 = random_vec(rng, 4 * q), p3 = random_vec(rng, 4 * q),
             o3 = random_vec(rng, 4 * q);
        EXPECT_NEAR(score_qmult(s3, p3, o3), oracle::qmult_score(s3, p3, o3), 1e-10);
    }
}

TEST(Scoring, ComplexReLinearityProbes) {
    Rng rng(5);
    for (int it = 0; it < 50; ++it) {
        std::size_t n = 2 * (1 + rng.next_below(4));
        auto a = random_vec(rng, n), b = random_vec(rng, n);
        auto p = random_vec(rng, n), o = random_vec(rng, n);
        double alpha = rng.uniform(-2, 2), beta = rng.uniform(-2, 2);
        std::vector<double> mix(n);
        for (std::size_t i = 0; i < n; ++i) mix[i] = alpha * a[i] + beta * b[i];
        // Linear in the subject slot.
        EXPECT_NEAR(score_complex(mix, p, o),
                    alpha * score_complex(a, p, o) + beta * score_complex(b, p, o),
                    1e-9);
        // Linear in the relation and object slots too.
        EXPECT_NEAR(score_complex(o, mix, p),
                    alpha * score_complex(o, a, p) + beta * score_complex(o, b, p),
                    1e-9);
        EXPECT_NEAR(score_complex(p, o, mix),
                    alpha * score_complex(p, o, a) + beta * score_complex(p, o, b),
                    1e-9);
    }
}

TEST(AssertionEmbedding, LengthContracts) {
    // TransE d=100 → 300 reals.
    EmbeddingModel transe(ModelKind::TransE, 100);
    transe.add_entity("s");
    transe.add_relation("p");
    transe.add_entity("o");
    EXPECT_EQ(transe.assertion_embedding("s", "p", "o").size(), 300u);

    // ComplEx q=2 → 3 elements × 2 complex × 2 reals = 12.
    EmbeddingModel cx(ModelKind::ComplEx, 2);
    cx.add_entity("s");
    cx.add_relation("p");
    cx.add_entity("o");
    EXPECT_EQ(cx.assertion_embedding("s", "p", "o").size(), 12u);

    EmbeddingModel qm(ModelKind::QMult, 3);
    qm.add_entity("s");
    qm.add_relation("p");
    qm.add_entity("o");
    EXPECT_EQ(qm.assertion_embedding("s", "p", "o").size(), 36u);
}

TEST(AssertionEmbedding, ConcatenationOrder) {
    EmbeddingModel m(ModelKind::TransE, 1);
    m.entity_row(m.add_entity("s"))[0] = 2.0;
    m.relation_row(m.add_relation("p"))[0] = 3.0;
    m.entity_row(m.add_entity("o"))[0] = 5.0;
    std::vector<double> expect{2.0, 3.0, 5.0};
    EXPECT_EQ(m.assertion_embedding("s", "p", "o"), expect);
}

TEST(AssertionEmbedding, MissingEmbeddingCarriesIri) {
    EmbeddingModel m(ModelKind::TransE, 2);
    m.add_entity("s");
    m.add_relation("p");
    try {
        m.assertion_embedding("s", "p", "http://nowhere/x");
        FAIL() << "expected MissingEmbedding";
    } catch (const MissingEmbedding& e) {
        EXPECT_EQ(e.iri, "http://nowhere/x");
    }
}

namespace {

KnowledgeGraph two_clique_kg(std::vector<std::string>* held_out_lines) {
    // Two 10-entity cliques under <p>, joined by a single <bridge> edge.
    // Every 5th within-clique edge is held out of the training graph.
    std::string nt;
    int held = 0;
    for (int clique = 0; clique < 2; ++clique) {
        for (int i = 0; i < 10; ++i) {
            for (int j = 0; j < 10; ++j) {
                if (i == j) continue;
                std::string line = "<c" + std::to_string(clique) + "e" +
                                   std::to_string(i) + "> <p> <c" +
                                   std::to_string(clique) + "e" +
                                   std::to_string(j) + "> .";
                if (++held % 5 == 0) {
                    if (held_out_lines) held_out_lines->push_back(line);
                } else {
                    nt += line + "\n";
                }
            }
        }
    }
    nt += "<c0e0> <bridge> <c1e0> .\n";
    return parse_ntriples(nt);
}

}  // namespace

TEST(EmbeddingTraining, ShapesAndValidation) {
    KnowledgeGraph kg = parse_ntriples("<a> <p> <b> .");
    EmbeddingTrainConfig cfg;
    cfg.dim = 4;
    cfg.epochs = 1;
    EmbeddingModel m = train_embeddings(kg, cfg);
    EXPECT_EQ(m.entity_count(), 2u);
    EXPECT_EQ(m.relation_count(), 1u);
    EXPECT_TRUE(m.all_finite());

    cfg.dim = 0;
    EXPECT_THROW(train_embeddings(kg, cfg), ConfigError);
    cfg.dim = 4;
    cfg.epochs = 0;
    EXPECT_THROW(train_embeddings(kg, cfg), ConfigError);
    cfg.epochs = 1;
    KnowledgeGraph empty = parse_ntriples("");
    EXPECT_THROW(train_embeddings(empty, cfg), ConfigError);
}

TEST(EmbeddingTraining, DeterministicForFixedSeed) {
    KnowledgeGraph kg = two_clique_kg(nullptr);
    EmbeddingTrainConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 5;
    cfg.seed = 99;
    EmbeddingModel a = train_embeddings(kg, cfg);
    EmbeddingModel b = train_embeddings(kg, cfg);
    ASSERT_EQ(a.entity_count(), b.entity_count());
    for (std::size_t i = 0; i < a.entity_count(); ++i) {
        auto ra = a.entity_row(i), rb = b.entity_row(i);
        for (std::size_t j = 0; j < ra.size(); ++j)
            EXPECT_EQ(ra[j], rb[j]);  // bit-identical
    }
}

TEST(EmbeddingTraining, TranseNormProjection) {
    KnowledgeGraph kg = two_clique_kg(nullptr);
    EmbeddingTrainConfig cfg;
    cfg.dim = 16;
    cfg.epochs = 3;
    EmbeddingModel m = train_embeddings(kg, cfg);
    for (std::size_t i = 0; i < m.entity_count(); ++i) {
        double sq = 0.0;
        for (double v : m.entity_row(i)) sq += v * v;
        EXPECT_LE(std::sqrt(sq), 1.0 + 1e-6);
    }
}

TEST(EmbeddingTraining, TransePlantedStructure) {
    std::vector<std::string> held_out;
    KnowledgeGraph kg = two_clique_kg(&held_out);
    ASSERT_FALSE(held_out.empty());
    EmbeddingTrainConfig cfg;
    cfg.kind = ModelKind::TransE;
    cfg.dim = 16;
    cfg.epochs = 200;
    cfg.lr = 0.02;
    cfg.seed = 3;
    EmbeddingModel m = train_embeddings(kg, cfg);

    // Held-out true (within-clique) triples must out-score cross-clique
    // corruptions in at least 80% of pairs. Lower distance = better.
    std::string held_text;
    for (const std::string& line : held_out) held_text += line + "\n";
    KnowledgeGraph held = parse_ntriples(held_text);
    int wins = 0, total = 0;
    Rng rng(11);
    for (const Triple& t : held.triples()) {
        std::string s = held.terms().term(t.subject).lex;
        std::string o = held.terms().term(t.object).lex;
        std::string other_clique = s[1] == '0' ? "c1" : "c0";
        std::string corrupt = other_clique + "e" + std::to_string(rng.next_below(10));
        double d_true = m.score(s, "p", o);
        double d_false = m.score(s, "p", corrupt);
        wins += d_true < d_false ? 1 : 0;
        ++total;
    }
    EXPECT_GE(wins, static_cast<int>(0.8 * total))
        << "wins " << wins << "/" << total;
}

TEST(EmbeddingTraining, LogisticModelsLearnAndStayFinite) {
    std::vector<std::string> held_out;
    KnowledgeGraph kg = two_clique_kg(&held_out);
    for (ModelKind kind : {ModelKind::ComplEx, ModelKind::QMult}) {
        EmbeddingTrainConfig cfg;
        cfg.kind = kind;
        cfg.dim = 8;
        cfg.epochs = 150;
        cfg.lr = 0.02;
        cfg.seed = 4;
        std::vector<double> losses;
        EmbeddingModel m = train_embeddings(kg, cfg, &losses);
        EXPECT_TRUE(m.all_finite());
        ASSERT_EQ(losses.size(), 150u);
        // Optimization made progress.
        EXPECT_LT(losses.back(), losses.front());
    }
}

TEST(EmbeddingTraining, AnalyticScoreGradientsMatchFiniteDifferences) {
    Rng rng(31);
    for (ModelKind kind : {ModelKind::ComplEx, ModelKind::QMult}) {
        std::size_t n = kind == ModelKind::ComplEx ? 6 : 8;
        for (int it = 0; it < 20; ++it) {
            auto s = random_vec(rng, n, -1, 1);
            auto p = random_vec(rng, n, -1, 1);
            auto o = random_vec(rng, n, -1, 1);
            auto g = hybridfc::detail::score_gradients(kind, s, p, o);
            auto score = [&] {
                return kind == ModelKind::ComplEx ? score_complex(s, p, o)
                                                  : score_qmult(s, p, o);
            };
            for (std::size_t i = 0; i < n; ++i) {
                EXPECT_NEAR(g.ds[i], oracle::central_difference(score, &s[i]), 1e-6);
                EXPECT_NEAR(g.dp[i], oracle::central_difference(score, &p[i]), 1e-6);
                EXPECT_NEAR(g.do_[i], oracle::central_difference(score, &o[i]), 1e-6);
            }
        }
    }
}

TEST(EmbeddingTableIo, SaveLoadRoundTrip) {
    KnowledgeGraph kg = two_clique_kg(nullptr);
    EmbeddingTrainConfig cfg;
    cfg.kind = ModelKind::ComplEx;
    cfg.dim = 3;
    cfg.epochs = 4;
    cfg.seed = 21;
    EmbeddingModel m = train_embeddings(kg, cfg);
    m.config_hash = "deadbeef";
    auto dir = std::filesystem::temp_directory_path() / "hybridfc_emb_io_test";
    std::filesystem::remove_all(dir);
    m.save(dir);
    EmbeddingModel back = EmbeddingModel::load(dir);
    EXPECT_EQ(back.kind(), ModelKind::ComplEx);
    EXPECT_EQ(back.components(), 3);
    EXPECT_EQ(back.seed, 21u);
    EXPECT_EQ(back.config_hash, "deadbeef");
    ASSERT_EQ(back.entity_count(), m.entity_count());
    ASSERT_EQ(back.relation_count(), m.relation_count());
    for (const std::string& e : m.entity_names()) {
        auto a = m.entity(e), b = back.entity(e);
        for (std::size_t j = 0; j < a.size(); ++j)
            EXPECT_EQ(a[j], b[j]);  // %.17g round-trips doubles exactly
    }
    std::filesystem::remove_all(dir);
}

TEST(EmbeddingTableIo, HeaderErrors) {
    auto dir = std::filesystem::temp_directory_path() / "hybridfc_emb_hdr_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream e(dir / "entities.tsv");
        e << "a\t1\t2\n";
        std::ofstream r(dir / "relations.tsv");
        r << "#model=transe dim=2\n";
    }
    EXPECT_THROW(EmbeddingModel::load(dir), ParseError);
    {
        std::ofstream e(dir / "entities.tsv");
        e << "#model=transe dim=2\na\t1\t2\t3\n";
    }
    EXPECT_THROW(EmbeddingModel::load(dir), ParseError);
    std::filesystem::remove_all(dir);
}
