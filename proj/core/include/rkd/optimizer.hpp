// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "rkd/matrix.hpp"

namespace rkd {

/// v <- momentum * v + g + weight_decay * p;  p <- p - lr * v
struct SgdMomentum {
    double lr = 0.1;
    double momentum = 0.9;
    double weight_decay = 0.0;
};

/// Bias-corrected Adam without weight decay.
struct Adam {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

using OptimizerSpec = std::variant<SgdMomentum, Adam>;

double base_learning_rate(const OptimizerSpec& spec);

class Optimizer {
public:
    /// Buffers are shaped like `params`.
    Optimizer(OptimizerSpec spec, std::span<const Matrix> params);

    /// One update at learning rate `lr` (overrides the spec's base rate so
    /// schedules can scale it).
    void step(std::span<Matrix> params, std::span<const Matrix> grads, double lr);

    std::uint64_t steps() const noexcept { return steps_; }
    const OptimizerSpec& spec() const noexcept { return spec_; }

private:
    OptimizerSpec spec_;
    std::vector<Matrix> first_;
    std::vector<Matrix> second_;
    std::uint64_t steps_ = 0;
};

} // namespace rkd
