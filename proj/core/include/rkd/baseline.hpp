// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rkd/autodiff.hpp"
#include "rkd/relational.hpp"

namespace rkd {

/// Aligned anchor/positive/negative row indices into an embedding batch.
struct TripletIndexBatch {
    std::vector<std::size_t> anchors;
    std::vector<std::size_t> positives;
    std::vector<std::size_t> negatives;

    std::size_t size() const noexcept { return anchors.size(); }
};

/// Throws DomainError unless every triplet satisfies
/// label(a) == label(p), label(a) != label(n), a != p.
void validate_triplets(const TripletIndexBatch& triplets, std::span<const Label> labels);

inline constexpr double kDefaultTripletMargin = 0.2;
inline constexpr double kDefaultHkdTemperature = 4.0;

/// Mean over triplets of [ |e_a - e_p|^2 - |e_a - e_n|^2 + margin ]_+.
ad::Var triplet_loss(ad::Var embeddings, const TripletIndexBatch& triplets,
                     double margin = kDefaultTripletMargin);

/// Mean over rows of KL(softmax(t / tau) || softmax(s / tau)). With
/// `tau_squared` the result is multiplied by tau^2.
ad::Var hkd_loss(const Matrix& teacher_logits, ad::Var student_logits,
                 double temperature = kDefaultHkdTemperature, bool tau_squared = false);

/// Linear map beta(s) = s * weight^T + bias from student width to teacher width.
struct ProjectionParams {
    Matrix weight; // teacher_dim × student_dim
    Matrix bias;   // 1 × teacher_dim

    static ProjectionParams identity(std::size_t dim);
};

/// Tape handles for a projection bound as leaves (trainable) or constants.
struct ProjectionVars {
    ad::Var weight;
    ad::Var bias;
};

ProjectionVars bind(ad::Tape& tape, const ProjectionParams& proj, bool trainable);

/// Mean over rows of |t_i - beta(s_i)|^2.
ad::Var ikd_l2_loss(const Matrix& teacher_embeddings, ad::Var student_embeddings,
                    const ProjectionVars& projection);

/// Mean negative log-probability of the true class.
ad::Var cross_entropy_loss(ad::Var logits, std::span<const Label> labels);

} // namespace rkd
