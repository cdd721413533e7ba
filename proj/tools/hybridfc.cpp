// hybridfc — hybrid fact checking over RDF knowledge graphs.
//
// Pipelines compose from subcommands:
//   ingest-kg -> ingest-corpus -> train-embeddings -> precompute-evidence
//   -> train -> score / evaluate / ablate
// plus make-fixture, which generates the bundled synthetic benchmark.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hybridfc/config.hpp"
#include "hybridfc/corpus.hpp"
#include "hybridfc/dataset.hpp"
#include "hybridfc/embedding.hpp"
#include "hybridfc/embedding_train.hpp"
#include "hybridfc/ensemble.hpp"
#include "hybridfc/errors.hpp"
#include "hybridfc/evidence.hpp"
#include "hybridfc/fixture.hpp"
#include "hybridfc/kg.hpp"
#include "hybridfc/ntriples.hpp"
#include "hybridfc/pipeline.hpp"
#include "hybridfc/sentence_embedder.hpp"
#include "hybridfc/text_evidence.hpp"

namespace fs = std::filesystem;
using namespace hybridfc;

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;
};

void add_config_opts(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "TOML configuration file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--set", opts.sets,
                    "Override one configuration key (key=value, repeatable)");
}

PipelineConfig resolve_config(const CommonOpts& opts) {
    PipelineConfig cfg =
        opts.config_path.empty() ? PipelineConfig{} : load_config_toml(opts.config_path);
    for (const std::string& s : opts.sets) {
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + s + "'");
        apply_config_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

// Sidecar metadata for artifact formats that cannot carry a header.
void write_meta(const fs::path& path, const PipelineConfig& cfg) {
    nlohmann::json j;
    j["config_hash"] = cfg.config_hash();
    j["seed"] = cfg.seed;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

fs::path corpus_file(const fs::path& p) {
    return fs::is_directory(p) ? p / "corpus.jsonl" : p;
}

std::vector<EvidenceRecord> filter_records(std::vector<EvidenceRecord> records,
                                           const std::string& split) {
    if (split == "all") return records;
    std::vector<EvidenceRecord> out;
    for (EvidenceRecord& r : records)
        if (r.assertion.split == split) out.push_back(std::move(r));
    return out;
}

double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Everything `score` and `precompute-evidence` need loaded.
struct Stores {
    KnowledgeGraph kg;
    Corpus corpus;
    EmbeddingModel model;
    HashedBowEmbedder embedder;

    Stores(const fs::path& kg_dir, const fs::path& corpus_path, const fs::path& model_dir,
           int text_dim)
        : kg(load_kg_store(kg_dir)),
          corpus(load_corpus_jsonl(corpus_file(corpus_path))),
          model(EmbeddingModel::load(model_dir)),
          embedder(text_dim) {}
};

int cmd_ingest_kg(const std::string& input, const std::string& labels, const std::string& out,
                  const CommonOpts& common) {
    PipelineConfig cfg = resolve_config(common);
    NtReport report;
    KnowledgeGraph kg = load_ntriples_file(input, {}, &report);
    if (!labels.empty()) load_labels_tsv(kg, labels);
    save_kg_store(kg, out);
    write_meta(fs::path(out) / "meta.json", cfg);
    std::cout << "ingested " << report.triples << " triples (" << report.duplicates
              << " duplicates dropped) from " << report.lines << " lines\n"
              << "entities: " << kg.entities().size()
              << "  predicates: " << kg.predicates().size() << "  stored: " << kg.size()
              << " triples -> " << out << '\n';
    return 0;
}

int cmd_ingest_corpus(const std::string& input, const std::string& out,
                      const CommonOpts& common) {
    PipelineConfig cfg = resolve_config(common);
    Corpus corpus = load_corpus_jsonl(fs::path(input));
    fs::create_directories(out);
    {
        std::ofstream os(fs::path(out) / "corpus.jsonl");
        if (!os) throw ConfigError("cannot write " + (fs::path(out) / "corpus.jsonl").string());
        save_corpus_jsonl(corpus, os);
    }
    write_meta(fs::path(out) / "meta.json", cfg);
    std::size_t sentences = 0;
    std::set<std::string> sources;
    for (const CorpusDocument& d : corpus.documents()) {
        sentences += d.sentences.size();
        sources.insert(d.source_id);
    }
    std::cout << "ingested " << corpus.documents().size() << " documents, " << sentences
              << " sentences, " << sources.size() << " sources -> " << out << '\n';
    return 0;
}

int cmd_train_embeddings(const std::string& kg_dir, const std::string& out,
                         const CommonOpts& common) {
    PipelineConfig cfg = resolve_config(common);
    KnowledgeGraph kg = load_kg_store(kg_dir);
    std::vector<double> losses;
    EmbeddingModel model = train_embeddings(kg, cfg.embedding_config(), &losses);
    model.seed = cfg.seed;
    model.config_hash = cfg.config_hash();
    model.save(out);
    std::cout << "trained " << model_kind_name(cfg.model_kind) << " d=" << cfg.embed_dim
              << " for " << losses.size() << " epochs";
    if (!losses.empty()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", losses.back());
        std::cout << " (final loss " << buf << ")";
    }
    std::cout << " -> " << out << '\n';
    return 0;
}

int cmd_precompute_evidence(const std::string& kg_dir, const std::string& corpus_path,
                            const std::string& model_dir, const std::string& assertions_path,
                            const std::string& out, const std::string& split, int jobs,
                            const CommonOpts& common) {
    PipelineConfig cfg = resolve_config(common);
    std::vector<LabeledAssertion> assertions =
        filter_split(load_assertions_jsonl(assertions_path), split);
    if (assertions.empty())
        throw ConfigError("no assertions in split '" + split + "' of " + assertions_path);

    Stores stores(kg_dir, corpus_path, model_dir, cfg.text_dim);
    EvidenceBuildOptions opt = cfg.evidence_options();

    std::vector<EvidenceRecord> records;
    EvidenceDiagnostics diag;
    jobs = std::max(1, jobs);
    if (jobs == 1) {
        TextEvidence text(stores.corpus);
        EvidenceBuilder builder(stores.kg, text, stores.embedder, stores.model, opt);
        records = builder.build_dataset(assertions, &diag);
    } else {
        // Deterministic: contiguous chunks, merged in order. Each worker owns
        // its builder; the path-association cache is per-worker.
        std::size_t n = assertions.size();
        std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
        std::vector<std::vector<EvidenceRecord>> parts(workers);
        std::vector<EvidenceDiagnostics> diags(workers);
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < workers; ++w) {
            std::size_t lo = n * w / workers, hi = n * (w + 1) / workers;
            threads.emplace_back([&, w, lo, hi] {
                std::vector<LabeledAssertion> chunk(assertions.begin() + static_cast<long>(lo),
                                                    assertions.begin() + static_cast<long>(hi));
                TextEvidence text(stores.corpus);
                EvidenceBuilder builder(stores.kg, text, stores.embedder, stores.model, opt);
                parts[w] = builder.build_dataset(chunk, &diags[w]);
            });
        }
        for (std::thread& t : threads) t.join();
        for (std::size_t w = 0; w < workers; ++w) {
            records.insert(records.end(), std::make_move_iterator(parts[w].begin()),
                           std::make_move_iterator(parts[w].end()));
            diag.built += diags[w].built;
            diag.skipped += diags[w].skipped;
            diag.missing_embeddings += diags[w].missing_embeddings;
            diag.without_snippets += diags[w].without_snippets;
            diag.zero_zeta += diags[w].zero_zeta;
            diag.warnings.insert(diag.warnings.end(), diags[w].warnings.begin(),
                                 diags[w].warnings.end());
        }
    }

    save_evidence_jsonl(records, out);
    write_meta(out + ".meta.json", cfg);
    std::cout << "evidence built: " << diag.built << "  skipped: " << diag.skipped
              << "  missing embeddings: " << diag.missing_embeddings
              << "  without snippets: " << diag.without_snippets
              << "  zero zeta: " << diag.zero_zeta << " -> " << out << '\n';
    for (const std::string& w : diag.warnings) std::cerr << "warning: " << w << '\n';
    return 0;
}

int cmd_train(const std::string& evidence_path, const std::string& out, std::string history_path,
              const std::string& split, const CommonOpts& common) {
    PipelineConfig cfg = resolve_config(common);
    std::vector<EvidenceRecord> records =
        filter_records(load_evidence_jsonl(evidence_path), split);
    if (records.empty())
        throw ConfigError("no evidence records in split '" + split + "' of " + evidence_path);

    int text_dim = static_cast<int>(records.front().bundle.text.size());
    int emb_dim = static_cast<int>(records.front().bundle.embedding.size());
    EnsembleConfig net_cfg = cfg.ensemble_config(text_dim, emb_dim);
    net_cfg.channels = parse_channel_mask(cfg.channels);
    EnsembleNetwork net(net_cfg);
    TrainResult result = train_ensemble(net, to_examples(records));

    save_checkpoint(net, out, cfg.config_hash());
    if (history_path.empty())
        history_path = fs::path(out).replace_extension(".history.tsv").string();
    {
        std::ofstream os(history_path);
        if (!os) throw ConfigError("cannot write " + history_path);
        write_history_tsv(result, os, cfg.config_hash(), cfg.seed);
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", result.best_val_loss);
    std::cout << "trained " << net_cfg.channels.name() << ": " << result.train_count
              << " train / " << result.val_count << " val, batch " << result.batch_size
              << ", stopped at epoch " << result.stopped_epoch << ", best val loss " << buf
              << " at epoch " << result.best_epoch << '\n'
              << "checkpoint -> " << out << "\nhistory -> " << history_path << '\n';
    return 0;
}

int cmd_score(const std::string& checkpoint, const std::string& kg_dir,
              const std::string& corpus_path, const std::string& model_dir,
              const std::string& subject, const std::string& predicate,
              const std::string& object, bool explain, const CommonOpts& common) {
    PipelineConfig cfg = resolve_config(common);
    EnsembleNetwork net = load_checkpoint(checkpoint);
    Stores stores(kg_dir, corpus_path, model_dir, cfg.text_dim);
    TextEvidence text(stores.corpus);
    EvidenceBuilder builder(stores.kg, text, stores.embedder, stores.model,
                            cfg.evidence_options());

    EvidenceExplanation expl;
    EvidenceBundle bundle = builder.build(subject, predicate, object, &expl, nullptr);
    if (bundle.embedding_missing) {
        std::cerr << "MissingEmbedding: cannot embed (" << subject << ", " << predicate << ", "
                  << object << ")\n";
        for (const std::string& w : expl.warnings) std::cerr << "  " << w << '\n';
        return 1;
    }

    EnsembleExample ex;
    ex.text = bundle.text;
    ex.embedding = bundle.embedding;
    ex.zeta = bundle.zeta;
    std::printf("%.6f\n", net.predict(ex));

    if (explain) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", l2_norm(bundle.text));
        std::cout << "# text channel: " << expl.snippets.size() << " snippets, |phi_text| = "
                  << buf << '\n';
        int rank = 1;
        for (const EvidenceSnippet& s : expl.snippets) {
            std::snprintf(buf, sizeof buf, "bm25=%.4f trust=%.4f", s.retrieval_score, s.trust);
            std::cout << "#   [" << rank++ << "] " << buf << " doc=" << s.doc_id << " \""
                      << s.text << "\"\n";
        }
        std::snprintf(buf, sizeof buf, "%.6f", bundle.zeta);
        std::cout << "# path channel: zeta = " << buf << " from " << expl.paths.used.size()
                  << " paths (" << expl.paths.enumerated << " enumerated)\n";
        rank = 1;
        for (const PathScore& p : expl.paths.used) {
            std::snprintf(buf, sizeof buf, "assoc=%.6f support=%zu", p.association, p.support);
            std::cout << "#   [" << rank++ << "] " << buf << " "
                      << render_path(p.path, stores.kg) << '\n';
        }
        std::snprintf(buf, sizeof buf, "%.6f", l2_norm(bundle.embedding));
        std::cout << "# embedding channel: " << model_kind_name(stores.model.kind()) << " d="
                  << stores.model.components() << ", |phi(s,p,o)| = " << buf << '\n';
        for (const std::string& w : expl.warnings) std::cout << "# warning: " << w << '\n';
    }
    return 0;
}

int cmd_evaluate(const std::string& checkpoint, const std::string& evidence_path,
                 const std::string& out, const std::string& scores_path,
                 const std::string& split, bool overall, const CommonOpts& common) {
    PipelineConfig cfg = resolve_config(common);
    EnsembleNetwork net = load_checkpoint(checkpoint);
    std::vector<EvidenceRecord> records =
        filter_records(load_evidence_jsonl(evidence_path), split);
    if (records.empty())
        throw ConfigError("no evidence records in split '" + split + "' of " + evidence_path);

    std::vector<ScoredAssertion> scored = score_records(net, records);
    std::string name = net.config().channels.name();
    EvaluationReport report = evaluate_scores(name, scored, !overall);

    std::ofstream os(out);
    if (!os) throw ConfigError("cannot write " + out);
    write_report_tsv({report}, os, cfg.config_hash(), cfg.seed);
    write_report_tsv({report}, std::cout, cfg.config_hash(), cfg.seed);
    if (!scores_path.empty()) {
        std::ofstream ss(scores_path);
        if (!ss) throw ConfigError("cannot write " + scores_path);
        write_scores_jsonl(scored, ss, name, cfg.config_hash(), cfg.seed);
    }
    return 0;
}

int cmd_ablate(const std::string& evidence_path, const std::string& out,
               const std::string& scores_path, const std::string& components,
               const std::string& train_split, const std::string& eval_split, bool overall,
               const CommonOpts& common) {
    PipelineConfig cfg = resolve_config(common);
    std::vector<EvidenceRecord> all = load_evidence_jsonl(evidence_path);
    std::vector<EvidenceRecord> train_records = filter_records(all, train_split);
    std::vector<EvidenceRecord> eval_records = filter_records(all, eval_split);

    std::vector<ChannelMask> masks =
        components.empty() ? ablation_masks()
                           : std::vector<ChannelMask>{parse_channel_mask(components)};
    std::vector<PipelineRun> runs =
        run_ablation(cfg, train_records, eval_records, masks, !overall);

    std::vector<EvaluationReport> reports;
    for (const PipelineRun& run : runs) {
        reports.push_back(run.report);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", run.training.best_val_loss);
        std::cerr << "info: " << run.report.config_name << " stopped at epoch "
                  << run.training.stopped_epoch << ", best val loss " << buf << '\n';
    }
    std::ofstream os(out);
    if (!os) throw ConfigError("cannot write " + out);
    write_report_tsv(reports, os, cfg.config_hash(), cfg.seed);
    write_report_tsv(reports, std::cout, cfg.config_hash(), cfg.seed);
    if (!scores_path.empty()) {
        std::ofstream ss(scores_path);
        if (!ss) throw ConfigError("cannot write " + scores_path);
        for (const PipelineRun& run : runs)
            write_scores_jsonl(run.scored, ss, run.report.config_name, cfg.config_hash(),
                               cfg.seed);
    }
    return 0;
}

int cmd_make_fixture(const std::string& out) {
    FixtureData fx = make_fixture();
    write_fixture(fx, out);
    std::size_t sentences = 0;
    for (const CorpusDocument& d : fx.corpus.documents()) sentences += d.sentences.size();
    std::cout << "fixture: " << fx.kg.entities().size() << " entities, " << fx.kg.size()
              << " triples, " << fx.corpus.documents().size() << " documents, " << sentences
              << " sentences, " << fx.assertions.size() << " assertions -> " << out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid fact checking over RDF knowledge graphs"};
    app.require_subcommand(1);
    std::function<int()> action;

    // ingest-kg
    auto* ingest_kg = app.add_subcommand("ingest-kg", "Parse N-Triples into a KG store");
    static CommonOpts ik_common;
    static std::string ik_input, ik_labels, ik_out;
    ingest_kg->add_option("input", ik_input, "N-Triples file (.nt or .nt.gz)")
        ->required()
        ->check(CLI::ExistingFile);
    ingest_kg->add_option("--labels", ik_labels, "TSV with IRI<TAB>label overrides")
        ->check(CLI::ExistingFile);
    ingest_kg->add_option("--out", ik_out, "output KG store directory")->required();
    add_config_opts(ingest_kg, ik_common);
    ingest_kg->callback([&] { action = [] { return cmd_ingest_kg(ik_input, ik_labels, ik_out, ik_common); }; });

    // ingest-corpus
    auto* ingest_corpus = app.add_subcommand("ingest-corpus", "Index a JSON-lines corpus");
    static CommonOpts ic_common;
    static std::string ic_input, ic_out;
    ingest_corpus->add_option("input", ic_input, "corpus JSON-lines file")
        ->required()
        ->check(CLI::ExistingFile);
    ingest_corpus->add_option("--out", ic_out, "output corpus store directory")->required();
    add_config_opts(ingest_corpus, ic_common);
    ingest_corpus->callback([&] { action = [] { return cmd_ingest_corpus(ic_input, ic_out, ic_common); }; });

    // train-embeddings
    auto* train_emb = app.add_subcommand("train-embeddings", "Train KG embeddings");
    static CommonOpts te_common;
    static std::string te_kg, te_out;
    train_emb->add_option("--kg", te_kg, "KG store directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    train_emb->add_option("--out", te_out, "output model directory")->required();
    add_config_opts(train_emb, te_common);
    train_emb->callback([&] { action = [] { return cmd_train_embeddings(te_kg, te_out, te_common); }; });

    // precompute-evidence
    auto* pre = app.add_subcommand("precompute-evidence",
                                   "Build per-assertion evidence bundles");
    static CommonOpts pe_common;
    static std::string pe_kg, pe_corpus, pe_model, pe_assertions, pe_out, pe_split = "all";
    static int pe_jobs = 1;
    pre->add_option("--kg", pe_kg, "KG store directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    pre->add_option("--corpus", pe_corpus, "corpus store directory or corpus.jsonl")
        ->required()
        ->check(CLI::ExistingPath);
    pre->add_option("--model", pe_model, "embedding model directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    pre->add_option("--assertions", pe_assertions, "labeled assertions JSON-lines")
        ->required()
        ->check(CLI::ExistingFile);
    pre->add_option("--out", pe_out, "output evidence JSON-lines")->required();
    pre->add_option("--split", pe_split, "train | test | all")
        ->check(CLI::IsMember({"train", "test", "all"}));
    pre->add_option("--jobs", pe_jobs, "worker threads (output is order-stable)");
    add_config_opts(pre, pe_common);
    pre->callback([&] {
        action = [] {
            return cmd_precompute_evidence(pe_kg, pe_corpus, pe_model, pe_assertions, pe_out,
                                           pe_split, pe_jobs, pe_common);
        };
    });

    // train
    auto* train = app.add_subcommand("train", "Train the fusion ensemble");
    static CommonOpts tr_common;
    static std::string tr_evidence, tr_out, tr_history, tr_split = "train";
    train->add_option("--evidence", tr_evidence, "evidence JSON-lines")
        ->required()
        ->check(CLI::ExistingFile);
    train->add_option("--out", tr_out, "output checkpoint JSON")->required();
    train->add_option("--history", tr_history, "training history TSV (default: <out>.history.tsv)");
    train->add_option("--split", tr_split, "train | test | all")
        ->check(CLI::IsMember({"train", "test", "all"}));
    add_config_opts(train, tr_common);
    train->callback([&] {
        action = [] { return cmd_train(tr_evidence, tr_out, tr_history, tr_split, tr_common); };
    });

    // score
    auto* score = app.add_subcommand("score", "Score one assertion");
    static CommonOpts sc_common;
    static std::string sc_ckpt, sc_kg, sc_corpus, sc_model, sc_s, sc_p, sc_o;
    static bool sc_explain = false;
    score->add_option("--checkpoint", sc_ckpt, "ensemble checkpoint JSON")
        ->required()
        ->check(CLI::ExistingFile);
    score->add_option("--kg", sc_kg, "KG store directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    score->add_option("--corpus", sc_corpus, "corpus store directory or corpus.jsonl")
        ->required()
        ->check(CLI::ExistingPath);
    score->add_option("--model", sc_model, "embedding model directory")
        ->required()
        ->check(CLI::ExistingDirectory);
    score->add_option("-s,--subject", sc_s, "subject IRI")->required();
    score->add_option("-p,--predicate", sc_p, "predicate IRI")->required();
    score->add_option("-o,--object", sc_o, "object IRI")->required();
    score->add_flag("--explain", sc_explain, "print snippets, paths, zeta, channel norms");
    add_config_opts(score, sc_common);
    score->callback([&] {
        action = [] {
            return cmd_score(sc_ckpt, sc_kg, sc_corpus, sc_model, sc_s, sc_p, sc_o, sc_explain,
                             sc_common);
        };
    });

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint (AUROC per category)");
    static CommonOpts ev_common;
    static std::string ev_ckpt, ev_evidence, ev_out, ev_scores, ev_split = "test";
    static bool ev_overall = false;
    evaluate->add_option("--checkpoint", ev_ckpt, "ensemble checkpoint JSON")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--evidence", ev_evidence, "evidence JSON-lines")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--out", ev_out, "report TSV path")->required();
    evaluate->add_option("--scores", ev_scores, "per-assertion score dump JSON-lines");
    evaluate->add_option("--split", ev_split, "train | test | all")
        ->check(CLI::IsMember({"train", "test", "all"}));
    evaluate->add_flag("--overall", ev_overall, "single row instead of per-category rows");
    add_config_opts(evaluate, ev_common);
    evaluate->callback([&] {
        action = [] {
            return cmd_evaluate(ev_ckpt, ev_evidence, ev_out, ev_scores, ev_split, ev_overall,
                                ev_common);
        };
    });

    // ablate
    auto* ablate = app.add_subcommand("ablate", "Train and evaluate channel subsets");
    static CommonOpts ab_common;
    static std::string ab_evidence, ab_out, ab_scores, ab_components;
    static std::string ab_train_split = "train", ab_eval_split = "test";
    static bool ab_overall = false;
    ablate->add_option("--evidence", ab_evidence, "evidence JSON-lines with train+test splits")
        ->required()
        ->check(CLI::ExistingFile);
    ablate->add_option("--out", ab_out, "report TSV path")->required();
    ablate->add_option("--scores", ab_scores, "per-assertion score dump JSON-lines");
    ablate->add_option("--components", ab_components,
                       "channel subset, e.g. tc,pc,ec (default: all seven subsets)");
    ablate->add_option("--train-split", ab_train_split, "split used for training");
    ablate->add_option("--eval-split", ab_eval_split, "split used for evaluation");
    ablate->add_flag("--overall", ab_overall, "single row per subset instead of per-category");
    add_config_opts(ablate, ab_common);
    ablate->callback([&] {
        action = [] {
            return cmd_ablate(ab_evidence, ab_out, ab_scores, ab_components, ab_train_split,
                              ab_eval_split, ab_overall, ab_common);
        };
    });

    // make-fixture
    auto* fixture = app.add_subcommand("make-fixture", "Generate the synthetic benchmark");
    static std::string fx_out;
    fixture->add_option("--out", fx_out, "output directory")->required();
    fixture->callback([&] { action = [] { return cmd_make_fixture(fx_out); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        return action ? action() : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const MissingEmbedding& e) {
        std::cerr << "MissingEmbedding: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
