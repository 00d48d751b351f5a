// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "rkd/optimizer.hpp"

#include <cmath>
#include <string>

#include "rkd/error.hpp"

namespace rkd {

double base_learning_rate(const OptimizerSpec& spec) {
    return std::visit([](const auto& s) { return s.lr; }, spec);
}

Optimizer::Optimizer(OptimizerSpec spec, std::span<const Matrix> params) : spec_(spec) {
    for (const Matrix& p : params) {
        first_.emplace_back(p.rows(), p.cols());
        if (std::holds_alternative<Adam>(spec_)) second_.emplace_back(p.rows(), p.cols());
    }
}

void Optimizer::step(std::span<Matrix> params, std::span<const Matrix> grads, double lr) {
    if (params.size() != first_.size() || grads.size() != first_.size()) {
        throw DimensionError("optimizer built for " + std::to_string(first_.size()) +
                             " tensors, got " + std::to_string(params.size()) + " params and " +
                             std::to_string(grads.size()) + " gradients");
    }
    for (std::size_t t = 0; t < params.size(); ++t) {
        if (!params[t].same_shape(first_[t]) || !grads[t].same_shape(first_[t])) {
            throw DimensionError("optimizer tensor " + std::to_string(t) + " changed shape");
        }
    }
    ++steps_;

    if (const auto* sgd = std::get_if<SgdMomentum>(&spec_)) {
        for (std::size_t t = 0; t < params.size(); ++t) {
            Matrix& p = params[t];
            Matrix& v = first_[t];
            const Matrix& g = grads[t];
            for (std::size_t i = 0; i < p.size(); ++i) {
                v[i] = sgd->momentum * v[i] + g[i] + sgd->weight_decay * p[i];
                p[i] -= lr * v[i];
            }
        }
        return;
    }

    const Adam& adam = std::get<Adam>(spec_);
    const double t = static_cast<double>(steps_);
    const double c1 = 1.0 - std::pow(adam.beta1, t);
    const double c2 = 1.0 - std::pow(adam.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        Matrix& p = params[k];
        Matrix& m = first_[k];
        Matrix& v = second_[k];
        const Matrix& g = grads[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = adam.beta1 * m[i] + (1.0 - adam.beta1) * g[i];
            v[i] = adam.beta2 * v[i] + (1.0 - adam.beta2) * g[i] * g[i];
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            p[i] -= lr * m_hat / (std::sqrt(v_hat) + adam.eps);
        }
    }
}

} // namespace rkd
