#pragma once
// Adam optimizer over a flat parameter array. Shared by embedding training
// and ensemble training; deterministic given a deterministic gradient stream.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hybridfc/errors.hpp"

namespace hybridfc {

class Adam {
public:
    Adam(std::size_t size, double lr = 1e-3, double beta1 = 0.9,
         double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
          m_(size, 0.0), v_(size, 0.0) {}

    void step(std::span<double> params, std::span<const double> grads) {
        if (params.size() != m_.size() || grads.size() != m_.size())
            throw ContractViolation("Adam: parameter/gradient size mismatch");
        ++t_;
        double bc1 = 1.0 - std::pow(beta1_, t_);
        double bc2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
            v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
            double mhat = m_[i] / bc1;
            double vhat = v_[i] / bc2;
            params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }

    double learning_rate() const { return lr_; }

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<double> m_, v_;
};

}  // namespace hybridfc
