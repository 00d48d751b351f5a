// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "rkd/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "rkd/error.hpp"

namespace rkd {

namespace {

double evaluate(const ScalarGraph& f, const std::vector<Matrix>& params) {
    ad::Tape tape;
    std::vector<ad::Var> leaves;
    leaves.reserve(params.size());
    for (const Matrix& p : params) leaves.push_back(tape.leaf(p));
    return f(tape, leaves).value().item();
}

} // namespace

GradCheckResult finite_difference_check(const ScalarGraph& f, const std::vector<Matrix>& params,
                                        double h) {
    if (!(h > 0.0)) throw ParameterError("finite difference step must be positive");

    std::vector<Matrix> analytic;
    {
        ad::Tape tape;
        std::vector<ad::Var> leaves;
        for (const Matrix& p : params) leaves.push_back(tape.leaf(p));
        ad::Var root = f(tape, leaves);
        tape.backward(root);
        for (ad::Var v : leaves) analytic.push_back(v.grad());
    }

    GradCheckResult result;
    std::vector<Matrix> probe = params;
    for (std::size_t t = 0; t < probe.size(); ++t) {
        for (std::size_t i = 0; i < probe[t].size(); ++i) {
            const double saved = probe[t][i];
            probe[t][i] = saved + h;
            const double up = evaluate(f, probe);
            probe[t][i] = saved - h;
            const double down = evaluate(f, probe);
            probe[t][i] = saved;

            const double fd = (up - down) / (2.0 * h);
            const double ad_value = analytic[t][i];
            const double err =
                std::abs(ad_value - fd) / std::max(1e-8, std::abs(ad_value) + std::abs(fd));
            if (err > result.max_relative_error || !std::isfinite(err)) {
                result.max_relative_error = std::isfinite(err) ? err : INFINITY;
                result.worst_tensor = t;
                result.worst_index = i;
            }
        }
    }
    return result;
}

} // namespace rkd
