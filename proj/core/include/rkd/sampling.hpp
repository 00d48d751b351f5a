// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rkd/baseline.hpp"

namespace rkd {

/// Batches of batch_size / k_per_class classes with exactly k_per_class examples
/// each. Within an epoch no example is used twice; leftovers that cannot fill a
/// batch are dropped. Deterministic in (seed, epoch).
std::vector<std::vector<std::size_t>> class_balanced_batches(std::span<const Label> labels,
                                                             std::size_t batch_size,
                                                             std::size_t k_per_class,
                                                             std::uint64_t seed, std::size_t epoch);

struct SamplerOptions {
    /// Distances are clipped below at this value before weighting.
    double cutoff = 0.5;
    /// Negatives at or beyond this distance get zero weight (they cannot
    /// violate a small margin on the unit sphere).
    double nonzero_loss_cutoff = 1.4;
    /// Ignore distances and sample negatives uniformly.
    bool uniform = false;
};

/// For every ordered (anchor, positive) pair of the same class, draws one
/// negative with probability proportional to 1/q(d), where
/// q(d) ∝ d^(n-2) (1 - d^2/4)^((n-3)/2) is the density of pairwise distances
/// on the unit (n-1)-sphere. Log-weights are shifted by their maximum, which
/// caps every weight at 1 before normalisation. If every negative is masked
/// the draw falls back to uniform. DomainError when the batch has a single class.
TripletIndexBatch distance_weighted_triplets(const Matrix& embeddings, std::span<const Label> labels,
                                             std::uint64_t seed, const SamplerOptions& options = {});

} // namespace rkd
