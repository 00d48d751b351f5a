// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "oracles.hpp"
#include "rkd/error.hpp"
#include "rkd/sampling.hpp"

namespace rkd {
namespace {

std::vector<Label> blocks(std::size_t classes, std::size_t per_class) {
    std::vector<Label> labels;
    for (std::size_t c = 0; c < classes; ++c) labels.insert(labels.end(), per_class, static_cast<Label>(c));
    return labels;
}

TEST(ClassBalanced, ForcedComposition) {
    const auto labels = blocks(4, 10);
    const auto batches = class_balanced_batches(labels, 8, 2, 1, 0);
    ASSERT_EQ(batches.size(), 5u);
    for (const auto& b : batches) {
        std::map<Label, int> counts;
        for (std::size_t i : b) ++counts[labels[i]];
        EXPECT_EQ(counts.size(), 4u);
        for (const auto& [label, count] : counts) EXPECT_EQ(count, 2);
    }
}

TEST(ClassBalanced, DeterministicAndWithoutReplacement) {
    std::vector<Label> labels = blocks(7, 13);
    std::shuffle(labels.begin(), labels.end(), std::mt19937_64(3));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto a = class_balanced_batches(labels, 15, 5, seed, 4);
        EXPECT_EQ(a, class_balanced_batches(labels, 15, 5, seed, 4));
        EXPECT_NE(a, class_balanced_batches(labels, 15, 5, seed, 5));
        std::set<std::size_t> seen;
        for (const auto& b : a) {
            ASSERT_EQ(b.size(), 15u);
            std::map<Label, int> counts;
            for (std::size_t i : b) {
                EXPECT_TRUE(seen.insert(i).second) << "index " << i << " repeated";
                ++counts[labels[i]];
            }
            EXPECT_EQ(counts.size(), 3u);
        }
    }
}

TEST(ClassBalanced, Errors) {
    const auto labels = blocks(3, 4);
    EXPECT_THROW(class_balanced_batches(labels, 7, 2, 0, 0), ConfigError);
    EXPECT_THROW(class_balanced_batches(labels, 10, 5, 0, 0), ConfigError);
    EXPECT_THROW(class_balanced_batches(labels, 8, 2, 0, 0), ConfigError);
    EXPECT_THROW(class_balanced_batches(labels, 0, 2, 0, 0), ConfigError);
}

TEST(DistanceWeighted, ForcedNegative) {
    const Matrix e{{1, 0}, {1, 0}, {0, 1}};
    const std::vector<Label> labels{0, 0, 1};
    const TripletIndexBatch t = distance_weighted_triplets(e, labels, 5);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t.negatives, (std::vector<std::size_t>{2, 2}));
    validate_triplets(t, labels);
}

TEST(DistanceWeighted, SingletonClassesGiveNoTriplets) {
    const std::vector<Label> labels{0, 1};
    EXPECT_EQ(distance_weighted_triplets(Matrix{{1, 0}, {0, 1}}, labels, 0).size(), 0u);
}

TEST(DistanceWeighted, SingleClassIsError) {
    const std::vector<Label> labels{2, 2, 2};
    EXPECT_THROW(distance_weighted_triplets(Matrix(3, 2), labels, 0), DomainError);
}

TEST(DistanceWeighted, CoversEveryOrderedPositivePair) {
    std::mt19937_64 rng(2);
    Matrix e = testing::random_matrix(12, 4, rng);
    const auto labels = blocks(3, 4);
    const TripletIndexBatch t = distance_weighted_triplets(e, labels, 9);
    EXPECT_EQ(t.size(), 3u * 4 * 3);
    validate_triplets(t, labels);
    EXPECT_EQ(t.negatives, distance_weighted_triplets(e, labels, 9).negatives);
}

// 1 anchor, 1 positive, 4 negatives: counts over 10^4 seeded draws.
std::vector<int> negative_counts(const Matrix& e, const SamplerOptions& options) {
    const std::vector<Label> labels{0, 0, 1, 2, 3, 4};
    std::vector<int> counts(6, 0);
    for (std::uint64_t seed = 0; seed < 5000; ++seed) {
        const TripletIndexBatch t = distance_weighted_triplets(e, labels, seed, options);
        for (std::size_t r = 0; r < t.size(); ++r)
            if (t.anchors[r] == 0) ++counts[t.negatives[r]];
    }
    return counts;
}

void expect_uniform(const std::vector<int>& counts, int draws, int categories) {
    const double p = 1.0 / categories;
    const double sigma = std::sqrt(draws * p * (1 - p));
    for (int c = 2; c < 2 + categories; ++c) EXPECT_NEAR(counts[c], draws * p, 3 * sigma) << "negative " << c;
}

TEST(DistanceWeighted, UniformOverrideIsUniform) {
    // Negatives at very different distances; without the override the close
    // ones would dominate.
    const Matrix e{{0, 0, 0}, {0.1, 0, 0}, {0.6, 0, 0}, {0, 0.9, 0}, {0, 0, 1.2}, {1.3, 0, 0}};
    SamplerOptions uniform;
    uniform.uniform = true;
    const auto counts = negative_counts(e, uniform);
    expect_uniform(counts, 5000, 4);
    const auto weighted = negative_counts(e, {});
    EXPECT_GT(std::abs(weighted[2] - 1250), 300);
}

TEST(DistanceWeighted, EquidistantNegativesAreUniform) {
    const double s = std::sqrt(0.5);
    const Matrix e{{0, 0, 0}, {0.05, 0, 0}, {s, s, 0}, {s, -s, 0}, {-s, s, 0}, {-s, -s, 0}};
    expect_uniform(negative_counts(e, {}), 5000, 4);
}

TEST(DistanceWeighted, FarNegativesAreMaskedUnlessAllFar) {
    const Matrix e{{0, 0}, {0.1, 0}, {0.8, 0}, {1.9, 0}, {-1.8, 0}, {0, 1.95}};
    const auto counts = negative_counts(e, {});
    EXPECT_EQ(counts[2], 5000);
    const Matrix far{{0, 0}, {0.1, 0}, {1.5, 0}, {1.9, 0}, {-1.8, 0}, {0, 1.95}};
    expect_uniform(negative_counts(far, {}), 5000, 4);
}

} // namespace
} // namespace rkd
