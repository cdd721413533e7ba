#pragma once
// Trainable fusion of the three evidence channels. The full network computes
//   ω = σ( w_σᵀ · ϑ3( ϑ1(text) ⊕ ϑ2(embedding) ⊕ ζ ) )
// where each ϑ is an MlpModule. Channel subsets drop the absent inputs from
// the concatenation; single-channel configurations reduce to
//   text only: σ(w_σᵀ ϑ1(x)),  embedding only: σ(w_σᵀ ϑ2(x)),
//   path only: σ(w·ζ) with a single scalar weight.
// Training: Adam on clamped binary cross-entropy, stratified 80/20 split,
// batch size ⌈|train|/3⌉, validation every 10th epoch, early stopping after
// 50 epochs without ≥1e-6 improvement, best checkpoint restored.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridfc/errors.hpp"
#include "hybridfc/mlp.hpp"
#include "hybridfc/optim.hpp"
#include "hybridfc/rng.hpp"

namespace hybridfc {

using RowVector = Eigen::RowVectorXd;

struct ChannelMask {
    bool text = true;
    bool path = true;
    bool embedding = true;

    int count() const { return int(text) + int(path) + int(embedding); }

    bool operator==(const ChannelMask&) const = default;

    // Report label: single channels and pairs by their channel codes,
    // the full ensemble by the pipeline name.
    std::string name() const {
        if (text && path && embedding) return "HybridFC";
        std::string out;
        auto add = [&out](const char* code) {
            if (!out.empty()) out += '+';
            out += code;
        };
        if (text) add("TC");
        if (path) add("PC");
        if (embedding) add("EC");
        return out.empty() ? "none" : out;
    }
};

inline ChannelMask parse_channel_mask(const std::string& spec) {
    ChannelMask mask{false, false, false};
    std::string token;
    auto apply = [&mask](const std::string& t) {
        if (t == "TC" || t == "tc" || t == "text") mask.text = true;
        else if (t == "PC" || t == "pc" || t == "path") mask.path = true;
        else if (t == "EC" || t == "ec" || t == "embedding") mask.embedding = true;
        else if (t == "HybridFC" || t == "hybridfc" || t == "full")
            mask = ChannelMask{true, true, true};
        else
            throw ConfigError("unknown channel token '" + t + "' (expected TC, PC, EC, or HybridFC)");
    };
    for (char c : spec) {
        if (c == '+' || c == ',') {
            if (!token.empty()) apply(token);
            token.clear();
        } else {
            token += c;
        }
    }
    if (!token.empty()) apply(token);
    if (mask.count() == 0) throw ConfigError("channel mask selects no channels");
    return mask;
}

struct EnsembleConfig {
    int text_dim = 0;  // k(d+1)
    int emb_dim = 0;   // 3·d_emb
    int text_hidden = 256;
    int text_out = 32;
    int emb_hidden = 128;
    int emb_out = 32;
    int fuse_hidden = 32;
    int fuse_out = 16;
    double dropout_keep = 0.9;
    double bn_eps = 1e-5;
    double bn_momentum = 0.1;
    double lr = 1e-3;
    int max_epochs = 1000;
    int validate_every = 10;
    int patience = 50;
    double min_delta = 1e-6;
    double val_fraction = 0.2;
    std::uint64_t seed = 7;
    ChannelMask channels;

    void validate() const {
        std::vector<std::string> problems;
        if (channels.count() == 0) problems.push_back("at least one channel must be enabled");
        if (channels.text && text_dim <= 0) problems.push_back("text_dim must be positive");
        if (channels.embedding && emb_dim <= 0) problems.push_back("emb_dim must be positive");
        for (auto [v, n] : {std::pair{text_hidden, "text_hidden"}, {text_out, "text_out"},
                            {emb_hidden, "emb_hidden"}, {emb_out, "emb_out"},
                            {fuse_hidden, "fuse_hidden"}, {fuse_out, "fuse_out"}})
            if (v <= 0) problems.push_back(std::string(n) + " must be positive");
        if (dropout_keep <= 0.0 || dropout_keep > 1.0)
            problems.push_back("dropout_keep must lie in (0,1]");
        if (lr <= 0.0) problems.push_back("lr must be positive");
        if (max_epochs < 1) problems.push_back("max_epochs must be at least 1");
        if (validate_every < 1) problems.push_back("validate_every must be at least 1");
        if (patience < 1) problems.push_back("patience must be at least 1");
        if (min_delta < 0.0) problems.push_back("min_delta must be non-negative");
        if (val_fraction <= 0.0 || val_fraction >= 1.0)
            problems.push_back("val_fraction must lie in (0,1)");
        if (!problems.empty()) {
            std::string msg = "invalid ensemble config:";
            for (const auto& p : problems) msg += "\n  - " + p;
            throw ConfigError(msg);
        }
    }
};

// One training/scoring example: per-channel inputs plus the binary label.
struct EnsembleExample {
    std::vector<double> text;       // k(d+1) values
    std::vector<double> embedding;  // 3·d_emb values
    double zeta = 0.0;
    int label = 0;
};

struct EnsembleBatch {
    Matrix text;      // text_dim × B (empty when the channel is off)
    Matrix emb;       // emb_dim × B
    RowVector zeta;   // 1 × B
    RowVector label;  // 1 × B
};

struct EnsembleGrads {
    MlpGrads text, emb, fuse;
    Vector w_sigma;
};

struct EnsembleCache {
    MlpCache text, emb, fuse;
    Matrix fuse_in;
    RowVector s;
    RowVector omega;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Tracks the best validation loss; reports when patience is exhausted.
class EarlyStopper {
public:
    EarlyStopper(int patience, double min_delta)
        : patience_(patience), min_delta_(min_delta) {}

    // Returns true when training should stop after this validation point.
    bool observe(int epoch, double val_loss) {
        if (best_epoch_ < 0 || best_val_ - val_loss >= min_delta_) {
            best_val_ = val_loss;
            best_epoch_ = epoch;
            improved_ = true;
            return false;
        }
        improved_ = false;
        return epoch - best_epoch_ >= patience_;
    }

    bool improved_last() const { return improved_; }
    int best_epoch() const { return best_epoch_; }
    double best_val() const { return best_val_; }

private:
    int patience_;
    double min_delta_;
    double best_val_ = std::numeric_limits<double>::infinity();
    int best_epoch_ = -1;
    bool improved_ = false;
};

struct TrainHistoryEntry {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    std::vector<TrainHistoryEntry> history;
    int stopped_epoch = 0;
    int best_epoch = 0;
    double best_val_loss = 0.0;
    std::size_t train_count = 0;
    std::size_t val_count = 0;
    std::size_t batch_size = 0;
};

class EnsembleNetwork {
public:
    EnsembleNetwork() = default;

    explicit EnsembleNetwork(const EnsembleConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
        cfg_.validate();
        const auto& ch = cfg_.channels;
        if (ch.text)
            theta_text_ = MlpModule({cfg_.text_dim, cfg_.text_hidden, cfg_.text_out},
                                    cfg_.dropout_keep, cfg_.bn_eps, cfg_.bn_momentum, rng_);
        if (ch.embedding)
            theta_emb_ = MlpModule({cfg_.emb_dim, cfg_.emb_hidden, cfg_.emb_out},
                                   cfg_.dropout_keep, cfg_.bn_eps, cfg_.bn_momentum, rng_);
        int head_in = 0;
        if (ch.count() >= 2) {
            int fuse_in = (ch.text ? cfg_.text_out : 0) + (ch.embedding ? cfg_.emb_out : 0) +
                          (ch.path ? 1 : 0);
            theta_fuse_ = MlpModule({fuse_in, cfg_.fuse_hidden, cfg_.fuse_out},
                                    cfg_.dropout_keep, cfg_.bn_eps, cfg_.bn_momentum, rng_);
            head_in = cfg_.fuse_out;
        } else if (ch.text) {
            head_in = cfg_.text_out;
        } else if (ch.embedding) {
            head_in = cfg_.emb_out;
        } else {
            head_in = 1;  // path only: ω = σ(w·ζ)
        }
        double bound = std::sqrt(6.0 / static_cast<double>(head_in));
        w_sigma = Vector(head_in);
        for (int i = 0; i < head_in; ++i) w_sigma[i] = rng_.uniform(-bound, bound);
    }

    const EnsembleConfig& config() const { return cfg_; }
    bool fused() const { return cfg_.channels.count() >= 2; }

    RowVector forward(const EnsembleBatch& batch, Mode mode, EnsembleCache* cache = nullptr) {
        const auto& ch = cfg_.channels;
        Eigen::Index cols = batch_cols(batch);
        RowVector s;
        if (ch.count() >= 2) {
            Matrix fuse_in(theta_fuse_.shape().in, cols);
            Eigen::Index row = 0;
            if (ch.text) {
                Matrix u = theta_text_.forward(batch.text, mode, rng_,
                                               cache ? &cache->text : nullptr);
                fuse_in.middleRows(row, u.rows()) = u;
                row += u.rows();
            }
            if (ch.embedding) {
                Matrix u = theta_emb_.forward(batch.emb, mode, rng_,
                                              cache ? &cache->emb : nullptr);
                fuse_in.middleRows(row, u.rows()) = u;
                row += u.rows();
            }
            if (ch.path) {
                require_zeta(batch, cols);
                fuse_in.row(row) = batch.zeta;
            }
            Matrix u3 = theta_fuse_.forward(fuse_in, mode, rng_, cache ? &cache->fuse : nullptr);
            if (cache) cache->fuse_in = std::move(fuse_in);
            s = w_sigma.transpose() * u3;
        } else if (ch.text) {
            Matrix u = theta_text_.forward(batch.text, mode, rng_, cache ? &cache->text : nullptr);
            s = w_sigma.transpose() * u;
        } else if (ch.embedding) {
            Matrix u = theta_emb_.forward(batch.emb, mode, rng_, cache ? &cache->emb : nullptr);
            s = w_sigma.transpose() * u;
        } else {
            require_zeta(batch, cols);
            s = w_sigma[0] * batch.zeta;
        }
        RowVector omega(s.size());
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            // Finite inputs map strictly inside (0,1).
            omega[i] = std::clamp(sigmoid(s[i]), 1e-15, 1.0 - 1e-15);
        }
        if (cache) {
            cache->s = s;
            cache->omega = omega;
        }
        return omega;
    }

    static constexpr double kLossClamp = 1e-7;

    static double bce_loss(const RowVector& omega, const RowVector& label) {
        if (omega.size() != label.size() || omega.size() == 0)
            throw ContractViolation("bce_loss: score/label size mismatch or empty batch");
        double total = 0.0;
        for (Eigen::Index i = 0; i < omega.size(); ++i) {
            double w = std::clamp(omega[i], kLossClamp, 1.0 - kLossClamp);
            double y = label[i];
            total -= y * std::log(w) + (1.0 - y) * std::log(1.0 - w);
        }
        return total / static_cast<double>(omega.size());
    }

    // Train-mode forward, loss, and full backward pass. Gradients are
    // accumulated into zeroed tensors; returns the batch loss.
    double loss_and_gradients(const EnsembleBatch& batch, EnsembleGrads& grads) {
        EnsembleCache cache;
        RowVector omega = forward(batch, Mode::Train, &cache);
        double loss = bce_loss(omega, batch.label);
        zero_grads(grads);

        Eigen::Index n = omega.size();
        RowVector ds(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double w = omega[i];
            // The clamped loss is flat outside [kLossClamp, 1-kLossClamp].
            ds[i] = (w < kLossClamp || w > 1.0 - kLossClamp)
                        ? 0.0
                        : (w - batch.label[i]) / static_cast<double>(n);
        }

        const auto& ch = cfg_.channels;
        if (ch.count() >= 2) {
            Matrix du3 = w_sigma * ds;
            // u3 = w5·dropped was not cached directly; recompute it.
            grads.w_sigma = (theta_fuse_.w5 * cache.fuse.dropped) * ds.transpose();
            Matrix dfuse_in = theta_fuse_.backward(cache.fuse, du3, grads.fuse);
            Eigen::Index row = 0;
            if (ch.text) {
                Matrix du1 = dfuse_in.middleRows(row, cfg_.text_out);
                theta_text_.backward(cache.text, du1, grads.text);
                row += cfg_.text_out;
            }
            if (ch.embedding) {
                Matrix du2 = dfuse_in.middleRows(row, cfg_.emb_out);
                theta_emb_.backward(cache.emb, du2, grads.emb);
                row += cfg_.emb_out;
            }
        } else if (ch.text) {
            Matrix u1 = theta_text_.w5 * cache.text.dropped;
            grads.w_sigma = u1 * ds.transpose();
            Matrix du1 = w_sigma * ds;
            theta_text_.backward(cache.text, du1, grads.text);
        } else if (ch.embedding) {
            Matrix u2 = theta_emb_.w5 * cache.emb.dropped;
            grads.w_sigma = u2 * ds.transpose();
            Matrix du2 = w_sigma * ds;
            theta_emb_.backward(cache.emb, du2, grads.emb);
        } else {
            grads.w_sigma = Vector::Constant(1, (batch.zeta.array() * ds.array()).sum());
        }
        return loss;
    }

    double predict(const EnsembleExample& example) {
        EnsembleBatch batch = make_batch({example});
        return forward(batch, Mode::Eval)[0];
    }

    RowVector predict_batch(const std::vector<EnsembleExample>& examples) {
        EnsembleBatch batch = make_batch(examples);
        return forward(batch, Mode::Eval);
    }

    EnsembleBatch make_batch(const std::vector<EnsembleExample>& examples) const {
        std::vector<std::size_t> idx(examples.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        return make_batch(examples, idx);
    }

    EnsembleBatch make_batch(const std::vector<EnsembleExample>& examples,
                             std::span<const std::size_t> idx) const {
        if (idx.empty()) throw ContractViolation("make_batch: empty batch");
        const auto& ch = cfg_.channels;
        EnsembleBatch batch;
        Eigen::Index cols = static_cast<Eigen::Index>(idx.size());
        if (ch.text) batch.text = Matrix(cfg_.text_dim, cols);
        if (ch.embedding) batch.emb = Matrix(cfg_.emb_dim, cols);
        batch.zeta = RowVector(cols);
        batch.label = RowVector(cols);
        for (Eigen::Index j = 0; j < cols; ++j) {
            const EnsembleExample& ex = examples.at(idx[static_cast<std::size_t>(j)]);
            if (ex.label != 0 && ex.label != 1)
                throw ContractViolation("make_batch: labels must be 0 or 1");
            if (ch.text) {
                if (static_cast<int>(ex.text.size()) != cfg_.text_dim)
                    throw ContractViolation("make_batch: text vector has " +
                                            std::to_string(ex.text.size()) + " values, want " +
                                            std::to_string(cfg_.text_dim));
                for (int i = 0; i < cfg_.text_dim; ++i) batch.text(i, j) = ex.text[i];
            }
            if (ch.embedding) {
                if (static_cast<int>(ex.embedding.size()) != cfg_.emb_dim)
                    throw ContractViolation("make_batch: embedding vector has " +
                                            std::to_string(ex.embedding.size()) +
                                            " values, want " + std::to_string(cfg_.emb_dim));
                for (int i = 0; i < cfg_.emb_dim; ++i) batch.emb(i, j) = ex.embedding[i];
            }
            batch.zeta[j] = ex.zeta;
            batch.label[j] = static_cast<double>(ex.label);
        }
        return batch;
    }

    void zero_grads(EnsembleGrads& grads) const {
        const auto& ch = cfg_.channels;
        if (ch.text) grads.text.set_zero(theta_text_.shape());
        if (ch.embedding) grads.emb.set_zero(theta_emb_.shape());
        if (ch.count() >= 2) grads.fuse.set_zero(theta_fuse_.shape());
        grads.w_sigma = Vector::Zero(w_sigma.size());
    }

    // Trainable parameters flattened in a fixed order (batch-norm running
    // statistics are state, not parameters, and are excluded here).
    std::size_t param_count() const {
        std::size_t n = 0;
        visit_modules([&n](const MlpModule& m) {
            n += static_cast<std::size_t>(m.w1.size() + m.gamma.size() + m.beta.size() +
                                          m.w3.size() + m.w5.size());
        });
        return n + static_cast<std::size_t>(w_sigma.size());
    }

    std::vector<double> flatten_params() const {
        std::vector<double> out;
        out.reserve(param_count());
        visit_modules([&out](const MlpModule& m) {
            append(out, m.w1);
            append(out, m.gamma);
            append(out, m.beta);
            append(out, m.w3);
            append(out, m.w5);
        });
        append(out, w_sigma);
        return out;
    }

    void load_flat_params(std::span<const double> flat) {
        if (flat.size() != param_count())
            throw ContractViolation("load_flat_params: expected " +
                                    std::to_string(param_count()) + " values, got " +
                                    std::to_string(flat.size()));
        std::size_t pos = 0;
        visit_modules_mut([&flat, &pos](MlpModule& m) {
            take(flat, pos, m.w1);
            take(flat, pos, m.gamma);
            take(flat, pos, m.beta);
            take(flat, pos, m.w3);
            take(flat, pos, m.w5);
        });
        take(flat, pos, w_sigma);
    }

    std::vector<double> flatten_grads(const EnsembleGrads& grads) const {
        std::vector<double> out;
        out.reserve(param_count());
        const auto& ch = cfg_.channels;
        auto add_module = [&out](const MlpGrads& g) {
            append(out, g.w1);
            append(out, g.gamma);
            append(out, g.beta);
            append(out, g.w3);
            append(out, g.w5);
        };
        if (ch.text) add_module(grads.text);
        if (ch.embedding) add_module(grads.emb);
        if (ch.count() >= 2) add_module(grads.fuse);
        append(out, grads.w_sigma);
        return out;
    }

    // Full state (parameters + batch-norm running statistics) for checkpoints.
    std::vector<double> snapshot_state() const {
        std::vector<double> out = flatten_params();
        visit_modules([&out](const MlpModule& m) {
            append(out, m.run_mean);
            append(out, m.run_var);
        });
        return out;
    }

    void restore_state(std::span<const double> state) {
        std::size_t params = param_count();
        if (state.size() < params)
            throw ContractViolation("restore_state: state vector too short");
        load_flat_params(state.subspan(0, params));
        std::size_t pos = params;
        visit_modules_mut([&state, &pos](MlpModule& m) {
            take(state, pos, m.run_mean);
            take(state, pos, m.run_var);
        });
        if (pos != state.size())
            throw ContractViolation("restore_state: state vector size mismatch");
    }

    MlpModule theta_text_, theta_emb_, theta_fuse_;
    Vector w_sigma;

private:
    static Eigen::Index batch_cols(const EnsembleBatch& batch) {
        if (batch.text.size() > 0) return batch.text.cols();
        if (batch.emb.size() > 0) return batch.emb.cols();
        return batch.zeta.size();
    }

    static void require_zeta(const EnsembleBatch& batch, Eigen::Index cols) {
        if (batch.zeta.size() != cols)
            throw ContractViolation("forward: path channel enabled but zeta row is missing");
    }

    template <typename F>
    void visit_modules(F&& f) const {
        const auto& ch = cfg_.channels;
        if (ch.text) f(theta_text_);
        if (ch.embedding) f(theta_emb_);
        if (ch.count() >= 2) f(theta_fuse_);
    }

    template <typename F>
    void visit_modules_mut(F&& f) {
        const auto& ch = cfg_.channels;
        if (ch.text) f(theta_text_);
        if (ch.embedding) f(theta_emb_);
        if (ch.count() >= 2) f(theta_fuse_);
    }

    template <typename T>
    static void append(std::vector<double>& out, const T& tensor) {
        out.insert(out.end(), tensor.data(), tensor.data() + tensor.size());
    }

    template <typename T>
    static void take(std::span<const double> flat, std::size_t& pos, T& tensor) {
        std::copy_n(flat.data() + pos, tensor.size(), tensor.data());
        pos += static_cast<std::size_t>(tensor.size());
    }

    EnsembleConfig cfg_;
    Rng rng_{0};
};

// Stratified shuffle split: the last ⌊val_fraction·n⌋ of each class (after a
// seeded shuffle) form the validation set.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
};

inline SplitIndices stratified_split(const std::vector<EnsembleExample>& data,
                                     double val_fraction, std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < data.size(); ++i)
        (data[i].label == 1 ? pos : neg).push_back(i);
    Rng rng(seed);
    rng.shuffle(pos);
    rng.shuffle(neg);
    SplitIndices split;
    auto carve = [&](std::vector<std::size_t>& cls) {
        std::size_t n_val = static_cast<std::size_t>(
            std::floor(val_fraction * static_cast<double>(cls.size())));
        std::size_t n_train = cls.size() - n_val;
        split.train.insert(split.train.end(), cls.begin(), cls.begin() + n_train);
        split.val.insert(split.val.end(), cls.begin() + n_train, cls.end());
    };
    carve(pos);
    carve(neg);
    return split;
}

inline TrainResult train_ensemble(EnsembleNetwork& net,
                                  const std::vector<EnsembleExample>& data) {
    const EnsembleConfig& cfg = net.config();
    if (data.empty()) throw ConfigError("train_ensemble: empty training data");
    SplitIndices split = stratified_split(data, cfg.val_fraction, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    if (split.train.size() < 2)
        throw ConfigError("train_ensemble: need at least 2 training examples after the split");
    if (split.val.empty())
        throw ConfigError("train_ensemble: validation split is empty; provide more data");

    TrainResult result;
    result.train_count = split.train.size();
    result.val_count = split.val.size();
    std::size_t batch_size = (split.train.size() + 2) / 3;  // ⌈|train|/3⌉
    result.batch_size = batch_size;

    EnsembleBatch val_batch = net.make_batch(data, split.val);
    Adam adam(net.param_count(), cfg.lr);
    EarlyStopper stopper(cfg.patience, cfg.min_delta);
    Rng shuffle_rng(cfg.seed ^ 0xa5a5a5a55a5a5a5aULL);

    std::vector<double> best_state = net.snapshot_state();
    int best_epoch = 0;
    double best_val = std::numeric_limits<double>::infinity();
    EnsembleGrads grads;

    std::vector<std::size_t> order = split.train;
    int epoch = 0;
    for (epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        // Chunk into batches; a trailing single sample joins the previous
        // batch so train-mode batch norm always sees at least 2 samples.
        std::vector<std::pair<std::size_t, std::size_t>> chunks;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            std::size_t len = std::min(batch_size, order.size() - start);
            chunks.emplace_back(start, len);
        }
        if (chunks.size() >= 2 && chunks.back().second == 1) {
            chunks[chunks.size() - 2].second += 1;
            chunks.pop_back();
        }

        double epoch_loss = 0.0;
        for (auto [start, len] : chunks) {
            EnsembleBatch batch =
                net.make_batch(data, std::span<const std::size_t>(order).subspan(start, len));
            double loss = net.loss_and_gradients(batch, grads);
            epoch_loss += loss * static_cast<double>(len);
            std::vector<double> params = net.flatten_params();
            std::vector<double> flat_grads = net.flatten_grads(grads);
            adam.step(params, flat_grads);
            net.load_flat_params(params);
        }
        epoch_loss /= static_cast<double>(order.size());

        if (epoch % cfg.validate_every == 0) {
            RowVector val_scores = net.forward(val_batch, Mode::Eval);
            double val_loss = EnsembleNetwork::bce_loss(val_scores, val_batch.label);
            result.history.push_back({epoch, epoch_loss, val_loss});
            bool stop = stopper.observe(epoch, val_loss);
            if (stopper.improved_last()) {
                best_state = net.snapshot_state();
                best_epoch = epoch;
                best_val = val_loss;
            }
            if (stop) break;
        }
    }
    result.stopped_epoch = std::min(epoch, cfg.max_epochs);
    if (best_epoch > 0) {
        net.restore_state(best_state);
        result.best_epoch = best_epoch;
        result.best_val_loss = best_val;
    } else {
        result.best_epoch = result.stopped_epoch;
        result.best_val_loss = std::numeric_limits<double>::quiet_NaN();
    }
    return result;
}

// ---- checkpoint serialization -------------------------------------------

inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline nlohmann::json tensor_to_json(const Matrix& m) {
    nlohmann::json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    std::vector<double> data(m.data(), m.data() + m.size());
    j["data"] = data;
    return j;
}

inline nlohmann::json tensor_to_json(const Vector& v) {
    nlohmann::json j;
    j["rows"] = v.size();
    j["cols"] = 1;
    std::vector<double> data(v.data(), v.data() + v.size());
    j["data"] = data;
    return j;
}

template <typename T>
inline void tensor_from_json(const nlohmann::json& j, T& tensor, const std::string& name) {
    auto rows = j.at("rows").get<Eigen::Index>();
    auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw ConfigError("checkpoint tensor '" + name + "' has inconsistent shape");
    if constexpr (std::is_same_v<T, Vector>) {
        if (cols != 1) throw ConfigError("checkpoint tensor '" + name + "' should be a vector");
        tensor = Vector(rows);
    } else {
        tensor = Matrix(rows, cols);
    }
    for (Eigen::Index i = 0; i < tensor.size(); ++i) tensor.data()[i] = data[static_cast<std::size_t>(i)].get<double>();
}

inline nlohmann::json module_to_json(const MlpModule& m) {
    nlohmann::json j;
    j["w1"] = tensor_to_json(m.w1);
    j["gamma"] = tensor_to_json(m.gamma);
    j["beta"] = tensor_to_json(m.beta);
    j["w3"] = tensor_to_json(m.w3);
    j["w5"] = tensor_to_json(m.w5);
    j["run_mean"] = tensor_to_json(m.run_mean);
    j["run_var"] = tensor_to_json(m.run_var);
    return j;
}

inline void module_from_json(const nlohmann::json& j, MlpModule& m, const std::string& name) {
    tensor_from_json(j.at("w1"), m.w1, name + ".w1");
    tensor_from_json(j.at("gamma"), m.gamma, name + ".gamma");
    tensor_from_json(j.at("beta"), m.beta, name + ".beta");
    tensor_from_json(j.at("w3"), m.w3, name + ".w3");
    tensor_from_json(j.at("w5"), m.w5, name + ".w5");
    tensor_from_json(j.at("run_mean"), m.run_mean, name + ".run_mean");
    tensor_from_json(j.at("run_var"), m.run_var, name + ".run_var");
}

}  // namespace detail

inline nlohmann::json config_to_json(const EnsembleConfig& cfg) {
    nlohmann::json j;
    j["text_dim"] = cfg.text_dim;
    j["emb_dim"] = cfg.emb_dim;
    j["text_hidden"] = cfg.text_hidden;
    j["text_out"] = cfg.text_out;
    j["emb_hidden"] = cfg.emb_hidden;
    j["emb_out"] = cfg.emb_out;
    j["fuse_hidden"] = cfg.fuse_hidden;
    j["fuse_out"] = cfg.fuse_out;
    j["dropout_keep"] = cfg.dropout_keep;
    j["bn_eps"] = cfg.bn_eps;
    j["bn_momentum"] = cfg.bn_momentum;
    j["lr"] = cfg.lr;
    j["max_epochs"] = cfg.max_epochs;
    j["validate_every"] = cfg.validate_every;
    j["patience"] = cfg.patience;
    j["min_delta"] = cfg.min_delta;
    j["val_fraction"] = cfg.val_fraction;
    j["seed"] = cfg.seed;
    j["channels"] = cfg.channels.name();
    return j;
}

inline EnsembleConfig config_from_json(const nlohmann::json& j) {
    EnsembleConfig cfg;
    cfg.text_dim = j.at("text_dim").get<int>();
    cfg.emb_dim = j.at("emb_dim").get<int>();
    cfg.text_hidden = j.at("text_hidden").get<int>();
    cfg.text_out = j.at("text_out").get<int>();
    cfg.emb_hidden = j.at("emb_hidden").get<int>();
    cfg.emb_out = j.at("emb_out").get<int>();
    cfg.fuse_hidden = j.at("fuse_hidden").get<int>();
    cfg.fuse_out = j.at("fuse_out").get<int>();
    cfg.dropout_keep = j.at("dropout_keep").get<double>();
    cfg.bn_eps = j.at("bn_eps").get<double>();
    cfg.bn_momentum = j.at("bn_momentum").get<double>();
    cfg.lr = j.at("lr").get<double>();
    cfg.max_epochs = j.at("max_epochs").get<int>();
    cfg.validate_every = j.at("validate_every").get<int>();
    cfg.patience = j.at("patience").get<int>();
    cfg.min_delta = j.at("min_delta").get<double>();
    cfg.val_fraction = j.at("val_fraction").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.channels = parse_channel_mask(j.at("channels").get<std::string>());
    return cfg;
}

inline nlohmann::json checkpoint_to_json(const EnsembleNetwork& net,
                                         const std::string& config_hash = "") {
    nlohmann::json j;
    j["format_version"] = kCheckpointVersion;
    j["kind"] = "hybridfc-ensemble";
    j["config"] = config_to_json(net.config());
    if (!config_hash.empty()) j["config_hash"] = config_hash;
    const auto& ch = net.config().channels;
    if (ch.text) j["theta_text"] = detail::module_to_json(net.theta_text_);
    if (ch.embedding) j["theta_emb"] = detail::module_to_json(net.theta_emb_);
    if (ch.count() >= 2) j["theta_fuse"] = detail::module_to_json(net.theta_fuse_);
    j["w_sigma"] = detail::tensor_to_json(net.w_sigma);
    return j;
}

inline EnsembleNetwork checkpoint_from_json(const nlohmann::json& j) {
    if (!j.contains("format_version"))
        throw ConfigError("checkpoint is missing format_version");
    int version = j.at("format_version").get<int>();
    if (version != kCheckpointVersion)
        throw ConfigError("unsupported checkpoint format_version " + std::to_string(version) +
                          " (this build reads version " + std::to_string(kCheckpointVersion) + ")");
    EnsembleConfig cfg = config_from_json(j.at("config"));
    EnsembleNetwork net(cfg);
    const auto& ch = cfg.channels;
    if (ch.text) detail::module_from_json(j.at("theta_text"), net.theta_text_, "theta_text");
    if (ch.embedding) detail::module_from_json(j.at("theta_emb"), net.theta_emb_, "theta_emb");
    if (ch.count() >= 2) detail::module_from_json(j.at("theta_fuse"), net.theta_fuse_, "theta_fuse");
    detail::tensor_from_json(j.at("w_sigma"), net.w_sigma, "w_sigma");
    return net;
}

inline void save_checkpoint(const EnsembleNetwork& net, const std::string& path,
                            const std::string& config_hash = "") {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open checkpoint file for writing: " + path);
    out << checkpoint_to_json(net, config_hash).dump(2) << '\n';
}

inline EnsembleNetwork load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open checkpoint file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    return checkpoint_from_json(j);
}

}  // namespace hybridfc
