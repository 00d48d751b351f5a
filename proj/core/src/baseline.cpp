// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "rkd/baseline.hpp"

#include <cmath>
#include <string>

#include "rkd/error.hpp"

namespace rkd {

void validate_triplets(const TripletIndexBatch& triplets, std::span<const Label> labels) {
    if (triplets.positives.size() != triplets.size() || triplets.negatives.size() != triplets.size()) {
        throw DimensionError("triplet index lists have different lengths");
    }
    for (std::size_t t = 0; t < triplets.size(); ++t) {
        const std::size_t a = triplets.anchors[t], p = triplets.positives[t], n = triplets.negatives[t];
        if (a >= labels.size() || p >= labels.size() || n >= labels.size()) {
            throw DomainError("triplet " + std::to_string(t) + " indexes past the batch");
        }
        if (a == p || labels[a] != labels[p] || labels[a] == labels[n]) {
            throw DomainError("triplet " + std::to_string(t) + " violates the label constraints");
        }
    }
}

ad::Var triplet_loss(ad::Var embeddings, const TripletIndexBatch& triplets, double margin) {
    if (triplets.size() == 0) throw DomainError("triplet loss on an empty triplet batch");
    if (margin < 0.0) throw ParameterError("triplet margin must be non-negative");
    if (triplets.positives.size() != triplets.size() || triplets.negatives.size() != triplets.size()) {
        throw DimensionError("triplet index lists have different lengths");
    }
    ad::Var anchors = ad::gather_rows(embeddings, triplets.anchors);
    ad::Var pos = ad::row_sum(ad::square(ad::sub(anchors, ad::gather_rows(embeddings, triplets.positives))));
    ad::Var neg = ad::row_sum(ad::square(ad::sub(anchors, ad::gather_rows(embeddings, triplets.negatives))));
    return ad::mean(ad::max_scalar(ad::add_scalar(ad::sub(pos, neg), margin), 0.0));
}

ad::Var hkd_loss(const Matrix& teacher_logits, ad::Var student_logits, double temperature,
                 bool tau_squared) {
    if (!teacher_logits.same_shape(student_logits.value())) {
        throw DimensionError("hkd: teacher logits " + teacher_logits.shape_string() +
                             " vs student logits " + student_logits.value().shape_string());
    }
    if (teacher_logits.empty()) throw DomainError("hkd on empty logits");
    const Matrix log_p = ad::evaluate(teacher_logits, [&](ad::Var t) { return ad::log_softmax_rows(t, temperature); });
    Matrix p(log_p.rows(), log_p.cols());
    double entropy_term = 0.0; // sum p log p
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(log_p[i]);
        entropy_term += p[i] * log_p[i];
    }
    ad::Tape& tape = *student_logits.tape();
    const double rows = static_cast<double>(teacher_logits.rows());
    ad::Var log_q = ad::log_softmax_rows(student_logits, temperature);
    ad::Var cross = ad::sum(ad::mul(tape.constant(std::move(p)), log_q));
    ad::Var kl = ad::add_scalar(ad::scale(cross, -1.0 / rows), entropy_term / rows);
    return tau_squared ? ad::scale(kl, temperature * temperature) : kl;
}

ProjectionParams ProjectionParams::identity(std::size_t dim) {
    return {Matrix::identity(dim), Matrix(1, dim)};
}

ProjectionVars bind(ad::Tape& tape, const ProjectionParams& proj, bool trainable) {
    if (proj.bias.rows() != 1 || proj.bias.cols() != proj.weight.rows()) {
        throw DimensionError("projection bias " + proj.bias.shape_string() +
                             " does not match weight " + proj.weight.shape_string());
    }
    if (trainable) return {tape.leaf(proj.weight), tape.leaf(proj.bias)};
    return {tape.constant(proj.weight), tape.constant(proj.bias)};
}

ad::Var ikd_l2_loss(const Matrix& teacher_embeddings, ad::Var student_embeddings,
                    const ProjectionVars& projection) {
    if (projection.weight.cols() != student_embeddings.cols()) {
        throw DimensionError("projection expects student width " +
                             std::to_string(projection.weight.cols()) + ", got " +
                             std::to_string(student_embeddings.cols()));
    }
    ad::Var projected = ad::add_row(
        ad::matmul(student_embeddings, ad::transpose(projection.weight)), projection.bias);
    if (!projected.value().same_shape(teacher_embeddings)) {
        throw DimensionError("projected student " + projected.value().shape_string() +
                             " vs teacher " + teacher_embeddings.shape_string());
    }
    ad::Tape& tape = *student_embeddings.tape();
    ad::Var diff = ad::sub(tape.constant(teacher_embeddings), projected);
    const double rows = static_cast<double>(teacher_embeddings.rows());
    return ad::scale(ad::sum(ad::square(diff)), 1.0 / rows);
}

ad::Var cross_entropy_loss(ad::Var logits, std::span<const Label> labels) {
    if (labels.size() != logits.rows()) {
        throw DimensionError("cross entropy: " + std::to_string(labels.size()) + " labels for " +
                             std::to_string(logits.rows()) + " rows");
    }
    std::vector<std::size_t> columns(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= logits.cols()) {
            throw DomainError("label " + std::to_string(labels[i]) + " out of range for " +
                              std::to_string(logits.cols()) + " classes");
        }
        columns[i] = labels[i];
    }
    return ad::scale(ad::mean(ad::pick_columns(ad::log_softmax_rows(logits, 1.0), std::move(columns))), -1.0);
}

} // namespace rkd
