// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

#include "rkd/relational.hpp"

namespace rkd {

/// Gaussian clusters around class centres placed on a sphere.
struct SyntheticSpec {
    std::size_t classes = 8;
    std::size_t per_class = 100;
    std::size_t ambient_dim = 32;
    double cluster_spread = 0.15;
    double inter_class_separation = 1.0;
    std::uint64_t seed = 0;

    /// Throws ConfigError for zero counts or negative/non-finite scales.
    void validate() const;
    /// True when clusters are expected to overlap heavily (spread >= separation).
    bool overlapping() const noexcept { return cluster_spread >= inter_class_separation; }
};

/// Features ordered class by class. Class centres depend only on `spec.seed`;
/// `noise_stream` selects an independent noise draw around the same centres,
/// so stream 0 and stream 1 form a train/test split.
EmbeddingBatch gen_synthetic(const SyntheticSpec& spec, std::uint64_t noise_stream = 0);

} // namespace rkd
