// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "rkd/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

#include "rkd/error.hpp"

namespace rkd {

std::vector<std::vector<std::size_t>> class_balanced_batches(std::span<const Label> labels,
                                                             std::size_t batch_size,
                                                             std::size_t k_per_class,
                                                             std::uint64_t seed, std::size_t epoch) {
    if (k_per_class == 0 || batch_size == 0 || batch_size % k_per_class != 0) {
        throw ConfigError("batch size " + std::to_string(batch_size) +
                          " must be a positive multiple of examples-per-class " +
                          std::to_string(k_per_class));
    }
    const std::size_t classes_per_batch = batch_size / k_per_class;

    std::map<Label, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    for (const auto& [label, members] : by_class) {
        if (members.size() < k_per_class) {
            throw ConfigError("class " + std::to_string(label) + " has " + std::to_string(members.size()) +
                              " examples, fewer than " + std::to_string(k_per_class) + " per batch");
        }
    }
    if (by_class.size() < classes_per_batch) {
        throw ConfigError("batch needs " + std::to_string(classes_per_batch) + " classes, data has " +
                          std::to_string(by_class.size()));
    }

    std::seed_seq seq{seed, static_cast<std::uint64_t>(epoch), std::uint64_t{0xba7c4}};
    std::mt19937_64 rng(seq);

    // Per class, a shuffled stack of k-sized groups.
    std::vector<std::vector<std::vector<std::size_t>>> groups;
    for (auto& [label, members] : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        std::vector<std::vector<std::size_t>> class_groups;
        for (std::size_t g = 0; g + k_per_class <= members.size(); g += k_per_class)
            class_groups.emplace_back(members.begin() + g, members.begin() + g + k_per_class);
        groups.push_back(std::move(class_groups));
    }

    std::vector<std::vector<std::size_t>> batches;
    for (;;) {
        std::vector<std::size_t> available;
        for (std::size_t c = 0; c < groups.size(); ++c)
            if (!groups[c].empty()) available.push_back(c);
        if (available.size() < classes_per_batch) break;
        std::shuffle(available.begin(), available.end(), rng);
        std::vector<std::size_t> batch;
        batch.reserve(batch_size);
        for (std::size_t i = 0; i < classes_per_batch; ++i) {
            auto& stack = groups[available[i]];
            batch.insert(batch.end(), stack.back().begin(), stack.back().end());
            stack.pop_back();
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

TripletIndexBatch distance_weighted_triplets(const Matrix& embeddings, std::span<const Label> labels,
                                             std::uint64_t seed, const SamplerOptions& options) {
    const std::size_t n = embeddings.rows();
    if (labels.size() != n) throw DimensionError("sampler: label count does not match embeddings");
    if (n == 0 || std::all_of(labels.begin(), labels.end(), [&](Label l) { return l == labels[0]; })) {
        throw DomainError("distance-weighted sampling needs at least two classes in the batch");
    }
    const double dim = static_cast<double>(embeddings.cols());

    std::mt19937_64 rng(seed);
    TripletIndexBatch out;
    std::vector<std::size_t> negatives;
    std::vector<double> log_weights;
    std::vector<double> weights;
    for (std::size_t a = 0; a < n; ++a) {
        negatives.clear();
        log_weights.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (labels[j] == labels[a]) continue;
            double sq = 0.0;
            for (std::size_t c = 0; c < embeddings.cols(); ++c) {
                const double diff = embeddings(a, c) - embeddings(j, c);
                sq += diff * diff;
            }
            const double d = std::max(std::sqrt(sq), options.cutoff);
            negatives.push_back(j);
            if (d >= options.nonzero_loss_cutoff) {
                log_weights.push_back(-INFINITY);
            } else {
                const double shell = std::max(1.0 - 0.25 * d * d, 1e-8);
                log_weights.push_back((2.0 - dim) * std::log(d) - 0.5 * (dim - 3.0) * std::log(shell));
            }
        }
        bool has_positive = false;
        for (std::size_t p = 0; p < n; ++p) has_positive = has_positive || (p != a && labels[p] == labels[a]);
        if (!has_positive) continue;

        weights.assign(negatives.size(), 1.0);
        if (!options.uniform) {
            const double top = *std::max_element(log_weights.begin(), log_weights.end());
            if (std::isfinite(top)) {
                for (std::size_t i = 0; i < weights.size(); ++i) weights[i] = std::exp(log_weights[i] - top);
            }
        }
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        for (std::size_t p = 0; p < n; ++p) {
            if (p == a || labels[p] != labels[a]) continue;
            out.anchors.push_back(a);
            out.positives.push_back(p);
            out.negatives.push_back(negatives[pick(rng)]);
        }
    }
    return out;
}

} // namespace rkd
