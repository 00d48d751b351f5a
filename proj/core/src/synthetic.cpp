// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "rkd/synthetic.hpp"

#include <cmath>
#include <random>

#include "rkd/error.hpp"

namespace rkd {

void SyntheticSpec::validate() const {
    if (classes == 0 || per_class == 0 || ambient_dim == 0) {
        throw ConfigError("synthetic dataset counts must be positive");
    }
    if (!(cluster_spread >= 0.0) || !std::isfinite(cluster_spread)) {
        throw ConfigError("cluster spread must be a non-negative finite number");
    }
    if (!(inter_class_separation > 0.0) || !std::isfinite(inter_class_separation)) {
        throw ConfigError("inter-class separation must be positive");
    }
}

EmbeddingBatch gen_synthetic(const SyntheticSpec& spec, std::uint64_t noise_stream) {
    spec.validate();
    std::mt19937_64 center_rng(spec.seed);
    std::normal_distribution<double> unit(0.0, 1.0);

    Matrix centers(spec.classes, spec.ambient_dim);
    for (std::size_t c = 0; c < spec.classes; ++c) {
        auto row = centers.row(c);
        double norm_sq = 0.0;
        do {
            norm_sq = 0.0;
            for (double& v : row) {
                v = unit(center_rng);
                norm_sq += v * v;
            }
        } while (norm_sq == 0.0);
        const double k = spec.inter_class_separation / std::sqrt(norm_sq);
        for (double& v : row) v *= k;
    }

    std::seed_seq seq{spec.seed, noise_stream, std::uint64_t{0x6e6f697365}};
    std::mt19937_64 noise_rng(seq);
    EmbeddingBatch out{Matrix(spec.classes * spec.per_class, spec.ambient_dim), {}};
    out.labels.reserve(out.embeddings.rows());
    for (std::size_t c = 0; c < spec.classes; ++c) {
        for (std::size_t p = 0; p < spec.per_class; ++p) {
            auto row = out.embeddings.row(c * spec.per_class + p);
            auto center = centers.row(c);
            for (std::size_t j = 0; j < row.size(); ++j) {
                row[j] = center[j] + (spec.cluster_spread > 0.0 ? spec.cluster_spread * unit(noise_rng) : 0.0);
            }
            out.labels.push_back(static_cast<Label>(c));
        }
    }
    return out;
}

} // namespace rkd
