// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rkd/autodiff.hpp"

namespace rkd {

/// Builds a scalar graph from leaves bound to the given parameter values.
using ScalarGraph = std::function<ad::Var(ad::Tape&, std::span<const ad::Var>)>;

struct GradCheckResult {
    double max_relative_error = 0.0;
    /// Parameter tensor and flat coordinate where the maximum was attained.
    std::size_t worst_tensor = 0;
    std::size_t worst_index = 0;
};

/// Compares reverse-mode gradients with central differences
/// (f(p+h) - f(p-h)) / 2h for every coordinate of every parameter.
/// Relative error per coordinate is |ad - fd| / max(1e-8, |ad| + |fd|).
GradCheckResult finite_difference_check(const ScalarGraph& f, const std::vector<Matrix>& params,
                                        double h = 1e-3);

} // namespace rkd
