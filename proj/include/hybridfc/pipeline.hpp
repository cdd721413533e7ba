#pragma once
// End-to-end scoring and evaluation: run a trained ensemble over evidence
// records, compute per-category AUROC plus the unweighted average row, write
// TSV reports and per-assertion score dumps, and train/evaluate the seven
// channel-subset configurations for the ablation matrix.

#include <algorithm>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridfc/config.hpp"
#include "hybridfc/dataset.hpp"
#include "hybridfc/ensemble.hpp"
#include "hybridfc/errors.hpp"
#include "hybridfc/evidence.hpp"
#include "hybridfc/metrics.hpp"

namespace hybridfc {

struct ScoredAssertion {
    LabeledAssertion assertion;
    double score = 0.0;
};

inline std::vector<ScoredAssertion> score_records(EnsembleNetwork& net,
                                                  const std::vector<EvidenceRecord>& records) {
    std::vector<ScoredAssertion> out;
    out.reserve(records.size());
    if (records.empty()) return out;
    RowVector scores = net.predict_batch(to_examples(records));
    for (std::size_t i = 0; i < records.size(); ++i)
        out.push_back({records[i].assertion, scores[static_cast<Eigen::Index>(i)]});
    return out;
}

struct CategoryResult {
    std::string category;
    double auroc = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

struct EvaluationReport {
    std::string config_name;               // channel subset tag
    std::vector<CategoryResult> categories;  // sorted by category name
    double average = 0.0;                  // unweighted mean over categories
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

inline constexpr const char* kAverageRow = "Avrg.";

// Per-category AUROC plus the unweighted average. With group_by_category
// false the whole dataset forms one "all" category.
inline EvaluationReport evaluate_scores(const std::string& config_name,
                                        const std::vector<ScoredAssertion>& scored,
                                        bool group_by_category = true) {
    if (scored.empty()) throw ConfigError("evaluate: no scored assertions");
    std::map<std::string, std::pair<std::vector<double>, std::vector<int>>> groups;
    for (const ScoredAssertion& s : scored) {
        std::string key = group_by_category ? s.assertion.category : "all";
        groups[key].first.push_back(s.score);
        groups[key].second.push_back(s.assertion.label);
    }
    EvaluationReport report;
    report.config_name = config_name;
    double total = 0.0;
    for (const auto& [category, data] : groups) {
        CategoryResult row;
        row.category = category;
        for (int y : data.second) (y == 1 ? row.n_pos : row.n_neg) += 1;
        if (row.n_pos == 0 || row.n_neg == 0)
            throw MetricError("category '" + category +
                              "' needs both classes to evaluate (has " +
                              std::to_string(row.n_pos) + " positive, " +
                              std::to_string(row.n_neg) + " negative)");
        row.auroc = auroc(data.first, data.second);
        total += row.auroc;
        report.n_pos += row.n_pos;
        report.n_neg += row.n_neg;
        report.categories.push_back(std::move(row));
    }
    report.average = total / static_cast<double>(report.categories.size());
    return report;
}

// TSV: a comment line pinning config hash + seed, a header, then one row per
// (config, category) plus the per-config unweighted average row.
inline void write_report_tsv(const std::vector<EvaluationReport>& reports, std::ostream& out,
                             const std::string& config_hash, std::uint64_t seed) {
    out << "# config_hash=" << config_hash << " seed=" << seed << '\n';
    out << "config\tcategory\tauroc\tn_pos\tn_neg\n";
    char buf[32];
    for (const EvaluationReport& report : reports) {
        for (const CategoryResult& row : report.categories) {
            std::snprintf(buf, sizeof buf, "%.6f", row.auroc);
            out << report.config_name << '\t' << row.category << '\t' << buf << '\t'
                << row.n_pos << '\t' << row.n_neg << '\n';
        }
        std::snprintf(buf, sizeof buf, "%.6f", report.average);
        out << report.config_name << '\t' << kAverageRow << '\t' << buf << '\t' << report.n_pos
            << '\t' << report.n_neg << '\n';
    }
}

// Full-precision per-assertion dump for oracle recomputation of the report.
inline void write_scores_jsonl(const std::vector<ScoredAssertion>& scored, std::ostream& out,
                               const std::string& config_name, const std::string& config_hash,
                               std::uint64_t seed) {
    for (const ScoredAssertion& s : scored) {
        nlohmann::json j;
        j["subject"] = s.assertion.subject;
        j["predicate"] = s.assertion.predicate;
        j["object"] = s.assertion.object;
        j["label"] = s.assertion.label;
        j["category"] = s.assertion.category;
        j["split"] = s.assertion.split;
        j["score"] = s.score;
        j["config"] = config_name;
        j["config_hash"] = config_hash;
        j["seed"] = seed;
        out << j.dump() << '\n';
    }
}

// Trains one channel-subset ensemble on the train records and scores the
// eval records. Text/embedding widths are taken from the records themselves.
struct PipelineRun {
    EnsembleNetwork net;
    TrainResult training;
    std::vector<ScoredAssertion> scored;
    EvaluationReport report;
};

inline PipelineRun train_and_evaluate(const PipelineConfig& cfg, ChannelMask mask,
                                      const std::vector<EvidenceRecord>& train_records,
                                      const std::vector<EvidenceRecord>& eval_records,
                                      bool group_by_category = true) {
    if (train_records.empty()) throw ConfigError("pipeline: no training records");
    if (eval_records.empty()) throw ConfigError("pipeline: no evaluation records");
    int text_dim = static_cast<int>(train_records.front().bundle.text.size());
    int emb_dim = static_cast<int>(train_records.front().bundle.embedding.size());
    EnsembleConfig net_cfg = cfg.ensemble_config(text_dim, emb_dim);
    net_cfg.channels = mask;

    PipelineRun run;
    run.net = EnsembleNetwork(net_cfg);
    run.training = train_ensemble(run.net, to_examples(train_records));
    run.scored = score_records(run.net, eval_records);
    run.report = evaluate_scores(mask.name(), run.scored, group_by_category);
    return run;
}

// Table-6 order: single channels, pairs, then the full ensemble.
inline const std::vector<ChannelMask>& ablation_masks() {
    static const std::vector<ChannelMask> masks = {
        {true, false, false},  // TC
        {false, true, false},  // PC
        {false, false, true},  // EC
        {true, true, false},   // TC+PC
        {true, false, true},   // TC+EC
        {false, true, true},   // PC+EC
        {true, true, true},    // HybridFC
    };
    return masks;
}

inline std::vector<PipelineRun> run_ablation(const PipelineConfig& cfg,
                                             const std::vector<EvidenceRecord>& train_records,
                                             const std::vector<EvidenceRecord>& eval_records,
                                             const std::vector<ChannelMask>& masks,
                                             bool group_by_category = true) {
    if (masks.empty()) throw ConfigError("ablation: empty component subset list");
    std::vector<PipelineRun> runs;
    runs.reserve(masks.size());
    for (const ChannelMask& mask : masks)
        runs.push_back(
            train_and_evaluate(cfg, mask, train_records, eval_records, group_by_category));
    return runs;
}

// Training history TSV (epoch, train loss, validation loss).
inline void write_history_tsv(const TrainResult& result, std::ostream& out,
                              const std::string& config_hash, std::uint64_t seed) {
    out << "# config_hash=" << config_hash << " seed=" << seed << '\n';
    out << "epoch\ttrain_loss\tval_loss\n";
    char buf[64];
    for (const TrainHistoryEntry& e : result.history) {
        std::snprintf(buf, sizeof buf, "%d\t%.17g\t%.17g", e.epoch, e.train_loss, e.val_loss);
        out << buf << '\n';
    }
}

}  // namespace hybridfc
