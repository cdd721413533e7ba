#pragma once
// Desk-scale KG embedding training. TransE uses margin ranking loss with
// uniform subject/object corruption and a unit-ball projection of entity
// vectors after every epoch (its L2 regularizer); ComplEx and QMult use
// logistic loss with weighted-L2 regularization. All models share Adam and a
// seeded single-threaded loop, so a fixed seed reproduces tables bit for bit.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hybridfc/embedding.hpp"
#include "hybridfc/errors.hpp"
#include "hybridfc/kg.hpp"
#include "hybridfc/optim.hpp"
#include "hybridfc/rng.hpp"

namespace hybridfc {

struct EmbeddingTrainConfig {
    ModelKind kind = ModelKind::TransE;
    int dim = 16;              // components per vector (q)
    int epochs = 100;
    double lr = 1e-3;
    int negative_ratio = 1;    // corrupted samples per positive
    double margin = 1.0;       // TransE margin ranking loss
    double reg_weight = 1e-3;  // weighted-L2 strength (ComplEx/QMult)
    int batch_size = 128;
    std::uint64_t seed = 7;

    void validate() const {
        std::vector<std::string> problems;
        if (dim <= 0) problems.push_back("dim must be positive");
        if (epochs <= 0) problems.push_back("epochs must be positive");
        if (lr <= 0) problems.push_back("learning rate must be positive");
        if (negative_ratio <= 0) problems.push_back("negative ratio must be positive");
        if (batch_size <= 0) problems.push_back("batch size must be positive");
        if (!problems.empty()) {
            std::string msg = "embedding config invalid:";
            for (const auto& p : problems) msg += "\n  - " + p;
            throw ConfigError(msg);
        }
    }
};

namespace detail {

struct IndexedTriple {
    std::size_t s, p, o;
};

inline void add_scaled(std::span<double> dst, std::span<const double> src, double a) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += a * src[i];
}

// d/dv of the three logistic-loss score functions, as linear coefficients.
struct ScoreGrads {
    std::vector<double> ds, dp, do_;
};

inline ScoreGrads score_gradients(ModelKind kind, std::span<const double> s,
                                  std::span<const double> p,
                                  std::span<const double> o) {
    std::size_t n = s.size();
    ScoreGrads g{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    if (kind == ModelKind::ComplEx) {
        std::size_t q = n / 2;
        for (std::size_t j = 0; j < q; ++j) {
            double sr = s[j], si = s[q + j];
            double pr = p[j], pi = p[q + j];
            double onr = o[j], oni = o[q + j];
            // ∂f/∂s = conj(p)·o ; ∂f/∂p = conj(s)·o ; ∂f/∂o = s·p
            g.ds[j] = pr * onr + pi * oni;
            g.ds[q + j] = pr * oni - pi * onr;
            g.dp[j] = sr * onr + si * oni;
            g.dp[q + j] = sr * oni - si * onr;
            g.do_[j] = sr * pr - si * pi;
            g.do_[q + j] = sr * pi + si * pr;
        }
    } else if (kind == ModelKind::QMult) {
        // ∂f/∂s = o ⊗ conj(p) ; ∂f/∂p = conj(s) ⊗ o ; ∂f/∂o = s ⊗ p
        std::vector<double> conj_p(p.begin(), p.end());
        std::vector<double> conj_s(s.begin(), s.end());
        for (std::size_t j = 0; j < n; j += 4) {
            conj_p[j + 1] = -conj_p[j + 1]; conj_p[j + 2] = -conj_p[j + 2];
            conj_p[j + 3] = -conj_p[j + 3];
            conj_s[j + 1] = -conj_s[j + 1]; conj_s[j + 2] = -conj_s[j + 2];
            conj_s[j + 3] = -conj_s[j + 3];
        }
        hamilton_product(o, conj_p, g.ds);
        hamilton_product(conj_s, o, g.dp);
        hamilton_product(s, p, g.do_);
    } else {
        throw ContractViolation("score_gradients: TransE uses distance gradients");
    }
    return g;
}

}  // namespace detail

class EmbeddingTrainer {
public:
    EmbeddingTrainer(const KnowledgeGraph& kg, const EmbeddingTrainConfig& cfg)
        : kg_(kg), cfg_(cfg), rng_(cfg.seed) {
        cfg_.validate();
        model_ = EmbeddingModel(cfg_.kind, cfg_.dim);
        for (TermId e : kg.entities()) model_.add_entity(kg.terms().term(e).lex);
        for (TermId p : kg.predicates()) model_.add_relation(kg.terms().term(p).lex);
        for (const Triple& t : kg.triples()) {
            if (!kg.terms().is_iri(t.subject) || !kg.terms().is_iri(t.object)) continue;
            triples_.push_back({entity_idx(t.subject), relation_idx(t.predicate),
                                entity_idx(t.object)});
        }
        if (triples_.empty())
            throw ConfigError("cannot train embeddings: no entity-to-entity triples");
        init_parameters();
    }

    EmbeddingModel train(std::vector<double>* epoch_losses = nullptr) {
        std::size_t n_entity_params = model_.entity_count() * model_.real_dim();
        std::size_t n_relation_params = model_.relation_count() * model_.real_dim();
        Adam entity_opt(n_entity_params, cfg_.lr);
        Adam relation_opt(n_relation_params, cfg_.lr);
        std::vector<double> entity_grad(n_entity_params);
        std::vector<double> relation_grad(n_relation_params);
        std::vector<std::size_t> order(triples_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

        for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
            rng_.shuffle(order);
            double epoch_loss = 0.0;
            std::size_t examples = 0;
            for (std::size_t start = 0; start < order.size();
                 start += cfg_.batch_size) {
                std::size_t end = std::min(order.size(),
                                           start + static_cast<std::size_t>(cfg_.batch_size));
                std::fill(entity_grad.begin(), entity_grad.end(), 0.0);
                std::fill(relation_grad.begin(), relation_grad.end(), 0.0);
                double batch_loss = 0.0;
                std::size_t batch_examples = 0;
                for (std::size_t i = start; i < end; ++i) {
                    const auto& pos = triples_[order[i]];
                    for (int k = 0; k < cfg_.negative_ratio; ++k) {
                        auto neg = corrupt(pos);
                        batch_loss += cfg_.kind == ModelKind::TransE
                                          ? transe_pair(pos, neg, entity_grad,
                                                        relation_grad)
                                          : logistic_pair(pos, neg, entity_grad,
                                                          relation_grad);
                        ++batch_examples;
                    }
                }
                if (batch_examples == 0) continue;
                double inv = 1.0 / static_cast<double>(batch_examples);
                for (double& g : entity_grad) g *= inv;
                for (double& g : relation_grad) g *= inv;
                entity_opt.step(entity_storage(), entity_grad);
                relation_opt.step(relation_storage(), relation_grad);
                epoch_loss += batch_loss;
                examples += batch_examples;
            }
            if (cfg_.kind == ModelKind::TransE) project_entities();
            if (!model_.all_finite())
                throw ContractViolation("embedding training produced non-finite values at epoch " +
                                        std::to_string(epoch + 1));
            if (epoch_losses)
                epoch_losses->push_back(examples ? epoch_loss / examples : 0.0);
        }
        model_.seed = cfg_.seed;
        return std::move(model_);
    }

private:
    std::size_t entity_idx(TermId id) {
        return model_.add_entity(kg_.terms().term(id).lex);
    }
    std::size_t relation_idx(TermId id) {
        return model_.add_relation(kg_.terms().term(id).lex);
    }

    std::span<double> entity_storage() {
        return {const_cast<double*>(model_.entity_row(0).data()),
                model_.entity_count() * model_.real_dim()};
    }
    std::span<double> relation_storage() {
        return {const_cast<double*>(model_.relation_row(0).data()),
                model_.relation_count() * model_.real_dim()};
    }

    void init_parameters() {
        double bound = 6.0 / std::sqrt(static_cast<double>(model_.real_dim()));
        for (std::size_t i = 0; i < model_.entity_count(); ++i)
            for (double& v : model_.entity_row(i)) v = rng_.uniform(-bound, bound);
        for (std::size_t i = 0; i < model_.relation_count(); ++i)
            for (double& v : model_.relation_row(i)) v = rng_.uniform(-bound, bound);
    }

    detail::IndexedTriple corrupt(const detail::IndexedTriple& t) {
        detail::IndexedTriple neg = t;
        std::size_t replacement = rng_.next_below(model_.entity_count());
        if (rng_.next_bool()) {
            neg.s = replacement;
        } else {
            neg.o = replacement;
        }
        return neg;
    }

    // Margin ranking: max(0, margin + d(pos) − d(neg)), d = TransE distance.
    double transe_pair(const detail::IndexedTriple& pos,
                       const detail::IndexedTriple& neg,
                       std::vector<double>& entity_grad,
                       std::vector<double>& relation_grad) {
        double d_pos = model_.score(model_.entity_row(pos.s), model_.relation_row(pos.p),
                                    model_.entity_row(pos.o));
        double d_neg = model_.score(model_.entity_row(neg.s), model_.relation_row(neg.p),
                                    model_.entity_row(neg.o));
        double loss = cfg_.margin + d_pos - d_neg;
        if (loss <= 0.0) return 0.0;
        accumulate_distance_grad(pos, 1.0, entity_grad, relation_grad);
        accumulate_distance_grad(neg, -1.0, entity_grad, relation_grad);
        return loss;
    }

    void accumulate_distance_grad(const detail::IndexedTriple& t, double sign,
                                  std::vector<double>& entity_grad,
                                  std::vector<double>& relation_grad) {
        auto s = model_.entity_row(t.s);
        auto p = model_.relation_row(t.p);
        auto o = model_.entity_row(t.o);
        double dist = score_transe(s, p, o);
        if (dist < 1e-12) return;
        int d = model_.real_dim();
        double* gs = entity_grad.data() + t.s * d;
        double* gp = relation_grad.data() + t.p * d;
        double* go = entity_grad.data() + t.o * d;
        for (int i = 0; i < d; ++i) {
            double u = sign * (s[i] + p[i] - o[i]) / dist;
            gs[i] += u;
            gp[i] += u;
            go[i] -= u;
        }
    }

    // Logistic loss ln(1+e^{−y·f}) on the positive (y=+1) and corrupted
    // (y=−1) triple, plus weighted-L2 on every participating vector.
    double logistic_pair(const detail::IndexedTriple& pos,
                         const detail::IndexedTriple& neg,
                         std::vector<double>& entity_grad,
                         std::vector<double>& relation_grad) {
        return logistic_example(pos, +1.0, entity_grad, relation_grad) +
               logistic_example(neg, -1.0, entity_grad, relation_grad);
    }

    double logistic_example(const detail::IndexedTriple& t, double y,
                            std::vector<double>& entity_grad,
                            std::vector<double>& relation_grad) {
        auto s = model_.entity_row(t.s);
        auto p = model_.relation_row(t.p);
        auto o = model_.entity_row(t.o);
        double f = model_.score(s, p, o);
        // Numerically stable softplus(−y·f).
        double z = -y * f;
        double loss = z > 30.0 ? z : std::log1p(std::exp(z));
        double dldf = -y / (1.0 + std::exp(y * f));
        auto g = detail::score_gradients(cfg_.kind, s, p, o);
        int d = model_.real_dim();
        double* gs = entity_grad.data() + t.s * d;
        double* gp = relation_grad.data() + t.p * d;
        double* go = entity_grad.data() + t.o * d;
        for (int i = 0; i < d; ++i) {
            gs[i] += dldf * g.ds[i] + 2.0 * cfg_.reg_weight * s[i];
            gp[i] += dldf * g.dp[i] + 2.0 * cfg_.reg_weight * p[i];
            go[i] += dldf * g.do_[i] + 2.0 * cfg_.reg_weight * o[i];
            loss += cfg_.reg_weight * (s[i] * s[i] + p[i] * p[i] + o[i] * o[i]) / 3.0;
        }
        return loss;
    }

    void project_entities() {
        for (std::size_t i = 0; i < model_.entity_count(); ++i) {
            auto row = model_.entity_row(i);
            double sq = 0.0;
            for (double v : row) sq += v * v;
            if (sq > 1.0) {
                double inv = 1.0 / std::sqrt(sq);
                for (double& v : row) v *= inv;
            }
        }
    }

    const KnowledgeGraph& kg_;
    EmbeddingTrainConfig cfg_;
    Rng rng_;
    EmbeddingModel model_;
    std::vector<detail::IndexedTriple> triples_;
};

inline EmbeddingModel train_embeddings(const KnowledgeGraph& kg,
                                       const EmbeddingTrainConfig& cfg,
                                       std::vector<double>* epoch_losses = nullptr) {
    EmbeddingTrainer trainer(kg, cfg);
    return trainer.train(epoch_losses);
}

}  // namespace hybridfc
