#pragma once
// One MLP block of the fusion network: out = W5 · Drop_p(ReLU(W3 · BN(W1·x))).
// Columns are samples. Batch norm uses batch statistics (biased variance,
// ε guard) in train mode and running statistics (momentum 0.1) in eval mode.
// Dropout keeps units with probability p and rescales by 1/p at train time.
// No bias vectors: the batch-norm shift β plays that role.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hybridfc/errors.hpp"
#include "hybridfc/rng.hpp"

namespace hybridfc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Mode { Train, Eval };

struct MlpShape {
    int in = 0;
    int hidden = 0;
    int out = 0;
};

// Intermediate values of one forward pass, kept for backpropagation.
struct MlpCache {
    Matrix x;        // input
    Matrix xhat;     // normalized pre-activation
    Vector inv_std;  // 1/√(var+ε) per hidden unit (train) or running (eval)
    Matrix bn;       // γ·x̂+β
    Matrix a3;       // W3·bn
    Matrix dropped;  // dropout output (input of W5)
    Matrix mask;     // dropout keep mask (1/0), train mode only
    Mode mode = Mode::Eval;
};

struct MlpGrads {
    Matrix w1, w3, w5;
    Vector gamma, beta;

    void set_zero(const MlpShape& s) {
        w1 = Matrix::Zero(s.hidden, s.in);
        w3 = Matrix::Zero(s.hidden, s.hidden);
        w5 = Matrix::Zero(s.out, s.hidden);
        gamma = Vector::Zero(s.hidden);
        beta = Vector::Zero(s.hidden);
    }
};

class MlpModule {
public:
    MlpModule() = default;

    MlpModule(const MlpShape& shape, double dropout_keep, double bn_eps,
              double bn_momentum, Rng& rng)
        : shape_(shape), keep_(dropout_keep), eps_(bn_eps), momentum_(bn_momentum) {
        if (shape.in <= 0 || shape.hidden <= 0 || shape.out <= 0)
            throw ConfigError("mlp widths must be positive");
        if (keep_ <= 0.0 || keep_ > 1.0)
            throw ConfigError("dropout keep probability must lie in (0,1]");
        w1 = he_uniform(shape.hidden, shape.in, rng);
        w3 = he_uniform(shape.hidden, shape.hidden, rng);
        w5 = he_uniform(shape.out, shape.hidden, rng);
        gamma = Vector::Ones(shape.hidden);
        beta = Vector::Zero(shape.hidden);
        run_mean = Vector::Zero(shape.hidden);
        run_var = Vector::Ones(shape.hidden);
    }

    const MlpShape& shape() const { return shape_; }
    double dropout_keep() const { return keep_; }

    Matrix forward(const Matrix& x, Mode mode, Rng& rng, MlpCache* cache = nullptr) {
        if (x.rows() != shape_.in)
            throw ContractViolation("mlp_forward: input width mismatch (got " +
                                    std::to_string(x.rows()) + ", want " +
                                    std::to_string(shape_.in) + ")");
        if (mode == Mode::Train && x.cols() < 2)
            throw ContractViolation(
                "mlp_forward: train-mode batch statistics need at least 2 samples");
        Matrix a1 = w1 * x;

        Vector mean, inv_std;
        if (mode == Mode::Train) {
            mean = a1.rowwise().mean();
            Matrix centered = a1.colwise() - mean;
            Vector var = centered.array().square().rowwise().mean().matrix();
            inv_std = (var.array() + eps_).sqrt().inverse().matrix();
            run_mean = (1.0 - momentum_) * run_mean + momentum_ * mean;
            run_var = (1.0 - momentum_) * run_var + momentum_ * var;
        } else {
            mean = run_mean;
            inv_std = (run_var.array() + eps_).sqrt().inverse().matrix();
        }
        Matrix xhat = ((a1.colwise() - mean).array().colwise() * inv_std.array()).matrix();
        Matrix bn = ((xhat.array().colwise() * gamma.array()).colwise() + beta.array()).matrix();

        Matrix a3 = w3 * bn;
        Matrix r = a3.cwiseMax(0.0);

        Matrix mask;
        Matrix dropped;
        if (mode == Mode::Train && keep_ < 1.0) {
            mask = Matrix(r.rows(), r.cols());
            for (Eigen::Index j = 0; j < mask.cols(); ++j)
                for (Eigen::Index i = 0; i < mask.rows(); ++i)
                    mask(i, j) = rng.next_double() < keep_ ? 1.0 : 0.0;
            dropped = r.cwiseProduct(mask) / keep_;
        } else {
            dropped = r;
        }

        if (cache) {
            cache->x = x;
            cache->xhat = std::move(xhat);
            cache->inv_std = std::move(inv_std);
            cache->bn = std::move(bn);
            cache->a3 = std::move(a3);
            cache->dropped = dropped;
            cache->mask = std::move(mask);
            cache->mode = mode;
        }
        return w5 * dropped;
    }

    // Backpropagates dL/dout, accumulating parameter gradients into `grads`
    // and returning dL/dx. Valid only for caches produced in train mode.
    Matrix backward(const MlpCache& cache, const Matrix& dout, MlpGrads& grads) const {
        grads.w5 += dout * cache.dropped.transpose();
        Matrix dd = w5.transpose() * dout;
        Matrix dr = (cache.mode == Mode::Train && keep_ < 1.0)
                        ? (dd.cwiseProduct(cache.mask) / keep_).eval()
                        : dd;
        Matrix da3 = (cache.a3.array() > 0.0).select(dr, 0.0);
        grads.w3 += da3 * cache.bn.transpose();
        Matrix dbn = w3.transpose() * da3;

        grads.gamma += dbn.cwiseProduct(cache.xhat).rowwise().sum();
        grads.beta += dbn.rowwise().sum();
        Matrix dxhat = (dbn.array().colwise() * gamma.array()).matrix();

        Matrix da1;
        if (cache.mode == Mode::Train) {
            // Batch statistics depend on every sample in the batch.
            Vector mean_dxhat = dxhat.rowwise().mean();
            Vector mean_dxhat_xhat = dxhat.cwiseProduct(cache.xhat).rowwise().mean();
            Matrix corr = (cache.xhat.array().colwise() * mean_dxhat_xhat.array()).matrix();
            da1 = (((dxhat.colwise() - mean_dxhat) - corr).array().colwise() *
                   cache.inv_std.array())
                      .matrix();
        } else {
            da1 = (dxhat.array().colwise() * cache.inv_std.array()).matrix();
        }
        grads.w1 += da1 * cache.x.transpose();
        return w1.transpose() * da1;
    }

    Matrix w1, w3, w5;
    Vector gamma, beta;
    Vector run_mean, run_var;

private:
    static Matrix he_uniform(int rows, int cols, Rng& rng) {
        double bound = std::sqrt(6.0 / static_cast<double>(cols));
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j)
                m(i, j) = rng.uniform(-bound, bound);
        return m;
    }

    MlpShape shape_;
    double keep_ = 1.0;
    double eps_ = 1e-5;
    double momentum_ = 0.1;
};

}  // namespace hybridfc
