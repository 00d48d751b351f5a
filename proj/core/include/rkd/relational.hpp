// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Distance-wise and angle-wise relational potentials and the Huber-penalised
// distillation losses built on them. Both losses take the teacher as a frozen
// matrix and the student as a differentiable tape value, and average over all
// tuples of the mini-batch. Teacher and student may have different widths.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rkd/autodiff.hpp"
#include "rkd/matrix.hpp"

namespace rkd {

using Label = std::uint32_t;

/// N×d embeddings, one row per example, with aligned class labels.
struct EmbeddingBatch {
    Matrix embeddings;
    std::vector<Label> labels;

    std::size_t size() const noexcept { return embeddings.rows(); }
    std::size_t dim() const noexcept { return embeddings.cols(); }
};

struct IndexPair {
    std::size_t i;
    std::size_t j;
    friend bool operator==(const IndexPair&, const IndexPair&) = default;
};

/// Angle at vertex `j` between the directions towards `i` and `k`; i < k.
struct AngleTriplet {
    std::size_t i;
    std::size_t j;
    std::size_t k;
    friend bool operator==(const AngleTriplet&, const AngleTriplet&) = default;
};

/// All unordered pairs i < j in lexicographic order; n(n-1)/2 entries.
std::vector<IndexPair> enumerate_pairs(std::size_t n);

/// Every vertex j with every unordered flank pair {i, k}; n(n-1)(n-2)/2 entries,
/// ordered by vertex, then i, then k.
std::vector<AngleTriplet> enumerate_angle_triplets(std::size_t n);

/// Whether the batch-mean distance in the student potential is part of the graph.
enum class MeanGradient { kPropagate, kDetach };

/// ||e_i - e_j|| / max(mu, 1e-12) per pair, where mu is the mean distance over
/// `pairs`. Returns P×1.
ad::Var distance_potentials(ad::Var embeddings, std::span<const IndexPair> pairs,
                            MeanGradient mean_gradient = MeanGradient::kPropagate);
Matrix distance_potentials(const Matrix& embeddings, std::span<const IndexPair> pairs);

/// Cosine of the angle at the vertex, with both difference vectors divided by
/// max(norm, 1e-12). Duplicate points therefore give 0. Returns T×1.
ad::Var angle_potentials(ad::Var embeddings, std::span<const AngleTriplet> triplets);
Matrix angle_potentials(const Matrix& embeddings, std::span<const AngleTriplet> triplets);

/// Huber penalty with threshold 1: quadratic for |x - y| <= 1, linear beyond.
double huber(double x, double y) noexcept;

/// Mean Huber penalty between teacher and student distance potentials over all pairs.
ad::Var rkd_distance_loss(const Matrix& teacher, ad::Var student,
                          MeanGradient mean_gradient = MeanGradient::kPropagate);

/// Mean Huber penalty between teacher and student angle potentials over all angle triplets.
ad::Var rkd_angle_loss(const Matrix& teacher, ad::Var student);

/// lambda_distance * distance loss + lambda_angle * angle loss. A zero weight
/// skips its term entirely.
ad::Var rkd_da_loss(const Matrix& teacher, ad::Var student, double lambda_distance,
                    double lambda_angle);

/// Loss values without building a differentiable graph (analysis and reporting).
double rkd_distance_value(const Matrix& teacher, const Matrix& student);
double rkd_angle_value(const Matrix& teacher, const Matrix& student);

} // namespace rkd
