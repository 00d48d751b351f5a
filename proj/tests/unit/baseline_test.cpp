// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rkd/autodiff.hpp"
#include "rkd/baseline.hpp"
#include "rkd/error.hpp"

namespace rkd {
namespace {

using testing::random_matrix;

double triplet_value(const Matrix& e, const TripletIndexBatch& t, double margin = kDefaultTripletMargin) {
    ad::Tape tape;
    return triplet_loss(tape.constant(e), t, margin).value().item();
}

double hkd_value(const Matrix& t, const Matrix& s, double tau, bool tau2 = false) {
    ad::Tape tape;
    return hkd_loss(t, tape.constant(s), tau, tau2).value().item();
}

TripletIndexBatch single(std::size_t a, std::size_t p, std::size_t n) { return {{a}, {p}, {n}}; }

TEST(Triplet, HingeExamples) {
    EXPECT_EQ(triplet_value(Matrix{{0, 0}, {0, 0}, {1, 0}}, single(0, 1, 2)), 0.0);
    EXPECT_DOUBLE_EQ(triplet_value(Matrix{{0, 0}, {1, 0}, {0, 1}}, single(0, 1, 2)), 0.2);
}

TEST(Triplet, SubgradientZeroAtKink) {
    // d_ap^2 - d_an^2 + m = 1 - 1.25 + 0.25 = 0 exactly.
    const Matrix e{{0, 0}, {1, 0}, {1, 0.5}};
    ad::Tape tape;
    ad::Var x = tape.leaf(e);
    ad::Var l = triplet_loss(x, single(0, 1, 2), 0.25);
    EXPECT_EQ(l.value().item(), 0.0);
    tape.backward(l);
    EXPECT_EQ(x.grad(), Matrix(3, 2));
}

TEST(Triplet, Errors) {
    ad::Tape tape;
    ad::Var e = tape.leaf(Matrix(3, 2));
    EXPECT_THROW(triplet_loss(e, TripletIndexBatch{}), DomainError);
    EXPECT_THROW(triplet_loss(e, single(0, 1, 5)), DomainError);
    EXPECT_THROW(triplet_loss(e, single(0, 1, 2), -0.1), ParameterError);
}

TEST(Triplet, MeanOverTriplets) {
    std::mt19937_64 rng(2);
    const Matrix e = random_matrix(5, 3, rng);
    const TripletIndexBatch t{{0, 1, 2, 3}, {4, 2, 3, 0}, {1, 0, 4, 2}};
    double expected = 0.0;
    for (std::size_t r = 0; r < t.size(); ++r) {
        const double ap = testing::naive_distance(e, t.anchors[r], t.positives[r]);
        const double an = testing::naive_distance(e, t.anchors[r], t.negatives[r]);
        expected += std::max(ap * ap - an * an + 0.2, 0.0);
    }
    EXPECT_NEAR(triplet_value(e, t), expected / 4.0, 1e-12);
}

TEST(Triplet, RigidInvariantButNotScaleInvariant) {
    std::mt19937_64 rng(3);
    const TripletIndexBatch t{{0, 1, 2}, {1, 2, 0}, {3, 4, 5}};
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix e = random_matrix(6, 3, rng, 0.3);
        const Matrix q = testing::random_orthogonal(3, rng);
        const Matrix moved = testing::similarity_transform(e, q, 1.0, {1.0, -2.0, 0.5});
        EXPECT_NEAR(triplet_value(e, t), triplet_value(moved, t), 1e-9);
    }
    // Active hinge: positive farther than negative.
    const Matrix e{{0, 0}, {1, 0}, {0, 0.5}};
    const double base = triplet_value(e, single(0, 1, 2));
    ASSERT_GT(base, 0.0);
    const Matrix doubled = testing::similarity_transform(e, Matrix::identity(2), 2.0, {0, 0});
    EXPECT_GT(std::abs(triplet_value(doubled, single(0, 1, 2)) - base), 0.1);
}

TEST(Hkd, Examples) {
    const Matrix t{{0, 0}};
    EXPECT_NEAR(hkd_value(t, t, 1.0), 0.0, 1e-15);
    const Matrix s{{0, std::log(3.0)}};
    EXPECT_NEAR(hkd_value(t, s, 1.0), 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-12);
    EXPECT_NEAR(hkd_value(t, s, 1.0), 0.14384103622589045, 1e-12);
    EXPECT_NEAR(hkd_value(t, s, 1.0, true), hkd_value(t, s, 1.0), 1e-15);
    EXPECT_NEAR(hkd_value(t, s, 2.0, true), 4.0 * hkd_value(t, s, 2.0), 1e-15);
}

TEST(Hkd, MonotoneInTemperature) {
    const Matrix t{{2, -1, 0.5}, {0, 3, -2}};
    const Matrix s{{-1, 1, 0}, {1, 0, 2}};
    double previous = INFINITY;
    for (double tau : {1.0, 4.0, 16.0, 100.0}) {
        const double v = hkd_value(t, s, tau);
        EXPECT_LT(v, previous);
        previous = v;
    }
    EXPECT_LT(previous, 1e-3);
}

TEST(Hkd, NonNegativeProperty) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix t = random_matrix(3, 5, rng, 4.0);
        const Matrix s = random_matrix(3, 5, rng, 4.0);
        EXPECT_GE(hkd_value(t, s, 1.0 + trial % 5), -1e-15);
        EXPECT_LE(std::abs(hkd_value(t, t, 1.0 + trial % 5)), 1e-12);
    }
}

TEST(Hkd, Errors) {
    ad::Tape tape;
    EXPECT_THROW(hkd_loss(Matrix(2, 3), tape.leaf(Matrix(2, 4))), DimensionError);
    EXPECT_THROW(hkd_loss(Matrix(2, 3), tape.leaf(Matrix(2, 3)), 0.0), ParameterError);
}

TEST(Ikd, Examples) {
    std::mt19937_64 rng(5);
    const Matrix e = random_matrix(4, 3, rng);
    ad::Tape tape;
    const ProjectionVars id = bind(tape, ProjectionParams::identity(3), false);
    EXPECT_EQ(ikd_l2_loss(e, tape.constant(e), id).value().item(), 0.0);

    const ProjectionVars zero = bind(tape, ProjectionParams{Matrix(2, 2), Matrix(1, 2)}, false);
    EXPECT_DOUBLE_EQ(ikd_l2_loss(Matrix{{1, 0}}, tape.constant(Matrix{{5, 7}}), zero).value().item(), 1.0);

    const ProjectionVars wrong = bind(tape, ProjectionParams{Matrix(3, 2), Matrix(1, 3)}, true);
    EXPECT_THROW(ikd_l2_loss(Matrix(1, 2), tape.constant(Matrix(1, 2)), wrong), DimensionError);
}

TEST(Ikd, MeanOverRows) {
    std::mt19937_64 rng(6);
    const Matrix t = random_matrix(5, 3, rng), s = random_matrix(5, 2, rng);
    const ProjectionParams p{random_matrix(3, 2, rng), random_matrix(1, 3, rng)};
    double expected = 0.0;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t c = 0; c < 3; ++c) {
            double proj = p.bias(0, c);
            for (std::size_t k = 0; k < 2; ++k) proj += p.weight(c, k) * s(i, k);
            expected += (t(i, c) - proj) * (t(i, c) - proj);
        }
    ad::Tape tape;
    EXPECT_NEAR(ikd_l2_loss(t, tape.constant(s), bind(tape, p, true)).value().item(), expected / 5.0, 1e-12);
}

TEST(CrossEntropy, Examples) {
    ad::Tape tape;
    const std::vector<Label> labels{1, 0};
    EXPECT_LT(cross_entropy_loss(tape.constant(Matrix{{0, 100, 0}, {100, 0, 0}}), labels).value().item(), 1e-10);
    for (std::size_t c : {2u, 5u, 17u}) {
        EXPECT_NEAR(cross_entropy_loss(tape.constant(Matrix(2, c, 0.3)), labels).value().item(),
                    std::log(static_cast<double>(c)), 1e-12);
    }
    const std::vector<Label> bad{0, 3};
    EXPECT_THROW(cross_entropy_loss(tape.constant(Matrix(2, 3)), bad), DomainError);
    const std::vector<Label> short_labels{0};
    EXPECT_THROW(cross_entropy_loss(tape.constant(Matrix(2, 3)), short_labels), DimensionError);
}

} // namespace
} // namespace rkd
