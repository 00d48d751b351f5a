// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "rkd/retrieval.hpp"

#include <limits>
#include <string>

#include "rkd/error.hpp"

namespace rkd {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

} // namespace

std::vector<double> recall_at_k(const Matrix& embeddings, std::span<const Label> labels,
                                std::span<const std::size_t> ks) {
    const std::size_t n = embeddings.rows();
    if (labels.size() != n) {
        throw DimensionError("recall: " + std::to_string(labels.size()) + " labels for " +
                             std::to_string(n) + " embeddings");
    }
    if (n < 2) throw DomainError("recall needs at least two embeddings");
    for (std::size_t k : ks) {
        if (k == 0 || k >= n) {
            throw DomainError("recall@" + std::to_string(k) + " undefined for " + std::to_string(n) +
                              " embeddings");
        }
    }

    // Rank of the nearest same-label neighbour decides every K at once: the
    // query hits at K iff that rank < K.
    std::vector<std::size_t> hits(ks.size(), 0);
    std::vector<double> dist(n);
    for (std::size_t q = 0; q < n; ++q) {
        std::size_t best = n;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == q) continue;
            dist[j] = squared_distance(embeddings.row(q), embeddings.row(j));
            if (labels[j] == labels[q] && (best == n || dist[j] < best_dist)) {
                best = j;
                best_dist = dist[j];
            }
        }
        if (best == n) continue;
        std::size_t rank = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == q) continue;
            if (dist[j] < best_dist || (dist[j] == best_dist && j < best)) ++rank;
        }
        for (std::size_t i = 0; i < ks.size(); ++i)
            if (rank < ks[i]) ++hits[i];
    }

    std::vector<double> recall(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) recall[i] = static_cast<double>(hits[i]) / static_cast<double>(n);
    return recall;
}

double accuracy(const Matrix& logits, std::span<const Label> labels) {
    if (labels.size() != logits.rows()) throw DimensionError("accuracy: label count does not match logits");
    if (labels.empty()) throw DomainError("accuracy of an empty batch");
    std::size_t correct = 0;
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        auto row = logits.row(r);
        std::size_t arg = 0;
        for (std::size_t c = 1; c < row.size(); ++c)
            if (row[c] > row[arg]) arg = c;
        if (arg == labels[r]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

} // namespace rkd
