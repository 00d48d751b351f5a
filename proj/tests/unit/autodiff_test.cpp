// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gradient_cases.hpp"
#include "oracles.hpp"
#include "rkd/autodiff.hpp"
#include "rkd/error.hpp"
#include "rkd/gradcheck.hpp"

namespace rkd {
namespace {

using testing::random_matrix;

class GradientCase : public ::testing::TestWithParam<std::string> {};

TEST_P(GradientCase, MatchesCentralDifferences) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const testing::GradCase c = testing::make_gradient_case(GetParam(), seed);
        const GradCheckResult r = finite_difference_check(c.graph, c.params);
        EXPECT_LT(r.max_relative_error, 1e-4)
            << "seed " << seed << " tensor " << r.worst_tensor << " index " << r.worst_index;
    }
}

INSTANTIATE_TEST_SUITE_P(AllOps, GradientCase, ::testing::ValuesIn(testing::gradient_case_names()),
                         [](const auto& info) { return info.param; });

TEST(GradCheck, LinearFunctionIsExact) {
    std::mt19937_64 rng(3);
    const auto r = finite_difference_check(
        [](ad::Tape&, std::span<const ad::Var> p) { return ad::sum(p[0]); }, {random_matrix(3, 3, rng)});
    EXPECT_LT(r.max_relative_error, 1e-10);
}

TEST(GradCheck, QuadraticAtOne) {
    ad::Tape tape;
    ad::Var x = tape.leaf(Matrix(2, 2, 1.0));
    ad::Var f = ad::sum(ad::square(x));
    tape.backward(f);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(x.grad()[i], 2.0);
    const auto r = finite_difference_check(
        [](ad::Tape&, std::span<const ad::Var> p) { return ad::sum(ad::square(p[0])); }, {Matrix(2, 2, 1.0)});
    EXPECT_LT(r.max_relative_error, 1e-6);
}

TEST(GradCheck, DetectsWrongGradient) {
    // x * stop_gradient(x): the tape sees x, differences see x^2.
    const auto r = finite_difference_check(
        [](ad::Tape& tape, std::span<const ad::Var> p) {
            return ad::sum(ad::mul(p[0], tape.constant(p[0].value())));
        },
        {Matrix(1, 2, 1.5)});
    EXPECT_GT(r.max_relative_error, 0.1);
}

TEST(GradCheck, RejectsNonPositiveStep) {
    EXPECT_THROW(finite_difference_check([](ad::Tape&, std::span<const ad::Var> p) { return ad::sum(p[0]); },
                                         {Matrix(1, 1)}, 0.0),
                 ParameterError);
}

TEST(Autodiff, MatmulBackwardOfSumIsOnesTimesBT) {
    std::mt19937_64 rng(1);
    ad::Tape tape;
    ad::Var a = tape.leaf(random_matrix(2, 3, rng));
    ad::Var b = tape.leaf(random_matrix(3, 4, rng));
    tape.backward(ad::sum(ad::matmul(a, b)));
    const Matrix expected = matmul(Matrix::ones(2, 4), b.value().transposed());
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(a.grad()[i], expected[i], 1e-12);
}

TEST(Autodiff, ShapeMismatchIsDimensionError) {
    ad::Tape tape;
    ad::Var a = tape.leaf(Matrix(2, 3));
    ad::Var b = tape.leaf(Matrix(3, 2));
    EXPECT_THROW(ad::add(a, b), DimensionError);
    EXPECT_THROW(ad::mul(a, b), DimensionError);
    EXPECT_THROW(ad::matmul(a, a), DimensionError);
}

TEST(Autodiff, SubSelfIsZero) {
    std::mt19937_64 rng(2);
    ad::Tape tape;
    ad::Var x = tape.leaf(random_matrix(3, 3, rng));
    EXPECT_EQ(ad::sub(x, x).value(), Matrix(3, 3));
}

TEST(Autodiff, GuardedSqrtAtZero) {
    ad::Tape tape;
    ad::Var x = tape.leaf(Matrix(1, 1, 0.0));
    ad::Var y = ad::sqrt(x);
    EXPECT_DOUBLE_EQ(y.value().item(), std::sqrt(1e-12));
    tape.backward(ad::sum(y));
    EXPECT_TRUE(std::isfinite(x.grad().item()));
}

TEST(Autodiff, GuardedLogAtZero) {
    ad::Tape tape;
    ad::Var x = tape.leaf(Matrix(1, 1, 0.0));
    ad::Var y = ad::log(x);
    EXPECT_DOUBLE_EQ(y.value().item(), std::log(1e-12));
    tape.backward(ad::sum(y));
    EXPECT_TRUE(std::isfinite(x.grad().item()));
}

TEST(Autodiff, SumAndMean) {
    ad::Tape tape;
    ad::Var x = tape.leaf(Matrix::ones(2, 3));
    EXPECT_DOUBLE_EQ(ad::sum(x).value().item(), 6.0);
    ad::Var m = tape.leaf(Matrix(2, 2, 5.0));
    tape.backward(ad::scale(ad::mean(m), 3.0));
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(m.grad()[i], 3.0 / 4.0);
}

TEST(Autodiff, MeanOfEmptyIsDomainError) {
    ad::Tape tape;
    EXPECT_THROW(ad::mean(tape.leaf(Matrix(0, 3))), DomainError);
    EXPECT_THROW(ad::sum(tape.leaf(Matrix(0, 0))), DomainError);
}

TEST(Autodiff, RowL2Normalize) {
    ad::Tape tape;
    ad::Var x = tape.leaf(Matrix{{3, 4}, {0.6, 0.8}, {0, 0}});
    const Matrix y = ad::row_l2_normalize(x).value();
    EXPECT_NEAR(y(0, 0), 0.6, 1e-15);
    EXPECT_NEAR(y(0, 1), 0.8, 1e-15);
    EXPECT_NEAR(y(1, 0), 0.6, 1e-15);
    EXPECT_NEAR(y(1, 1), 0.8, 1e-15);
    EXPECT_EQ(y(2, 0), 0.0);
    EXPECT_EQ(y(2, 1), 0.0);
}

TEST(Autodiff, SoftmaxRows) {
    ad::Tape tape;
    ad::Var u = tape.leaf(Matrix(2, 4, 7.0));
    const Matrix p = ad::softmax_rows(u, 1.0).value();
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_DOUBLE_EQ(p[i], 0.25);
    ad::Var v = tape.leaf(Matrix{{1, 2}});
    const Matrix q = ad::softmax_rows(v, 100.0).value();
    EXPECT_NEAR(q(0, 0), 0.5, 1e-2);
    EXPECT_NEAR(q(0, 1), 0.5, 1e-2);
    EXPECT_THROW(ad::softmax_rows(v, 0.0), ParameterError);
    EXPECT_THROW(ad::log_softmax_rows(v, -1.0), ParameterError);
}

TEST(Autodiff, SoftmaxRowsSumToOneProperty) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        ad::Tape tape;
        ad::Var x = tape.leaf(random_matrix(4, 6, rng, 30.0));
        const Matrix p = ad::softmax_rows(x, 0.5 + trial * 0.1).value();
        for (std::size_t r = 0; r < p.rows(); ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < p.cols(); ++c) {
                EXPECT_GE(p(r, c), 0.0);
                EXPECT_LE(p(r, c), 1.0);
                s += p(r, c);
            }
            EXPECT_NEAR(s, 1.0, 1e-12);
        }
    }
}

TEST(Autodiff, RootIsLeafGivesUnitGradient) {
    ad::Tape tape;
    ad::Var x = tape.leaf(Matrix::scalar(3.0));
    tape.backward(x);
    EXPECT_DOUBLE_EQ(x.grad().item(), 1.0);
}

TEST(Autodiff, SharedLeafAccumulates) {
    ad::Tape tape;
    ad::Var x = tape.leaf(Matrix::scalar(3.0));
    tape.backward(ad::add(x, x));
    EXPECT_DOUBLE_EQ(x.grad().item(), 2.0);
}

TEST(Autodiff, GradientAdditivityIsExact) {
    std::mt19937_64 rng(5);
    const Matrix x0 = random_matrix(3, 4, rng);
    auto grad_of = [&](int which) {
        ad::Tape tape;
        ad::Var x = tape.leaf(x0);
        ad::Var f = ad::sum(ad::exp(x));
        ad::Var g = ad::mean(ad::square(x));
        tape.backward(which == 0 ? f : which == 1 ? g : ad::add(f, g));
        return x.grad();
    };
    const Matrix gf = grad_of(0), gg = grad_of(1), gfg = grad_of(2);
    for (std::size_t i = 0; i < gf.size(); ++i) EXPECT_EQ(gfg[i], gf[i] + gg[i]);
}

TEST(Autodiff, BackwardStateErrors) {
    ad::Tape tape;
    ad::Var x = tape.leaf(Matrix(2, 2, 1.0));
    EXPECT_THROW(tape.backward(x), DimensionError);
    ad::Var s = ad::sum(x);
    tape.backward(s);
    EXPECT_THROW(tape.backward(s), StateError);
    tape.zero_grad();
    EXPECT_EQ(x.grad(), Matrix(2, 2));
    tape.backward(s);
    EXPECT_EQ(x.grad(), Matrix(2, 2, 1.0));
}

TEST(Autodiff, ConstantsReceiveNoGradient) {
    ad::Tape tape;
    ad::Var c = tape.constant(Matrix(1, 2, 2.0));
    ad::Var x = tape.leaf(Matrix(1, 2, 3.0));
    tape.backward(ad::sum(ad::mul(c, x)));
    EXPECT_EQ(c.grad(), Matrix(1, 2));
    EXPECT_EQ(x.grad(), Matrix(1, 2, 2.0));
}

TEST(Autodiff, MixingTapesRejected) {
    ad::Tape a, b;
    ad::Var x = a.leaf(Matrix(1, 1));
    ad::Var y = b.leaf(Matrix(1, 1));
    EXPECT_THROW(ad::add(x, y), StateError);
}

TEST(Autodiff, ForwardIsBitwiseDeterministic) {
    std::mt19937_64 rng(9);
    const Matrix x0 = random_matrix(5, 4, rng);
    auto run = [&] {
        return ad::evaluate(x0, [](ad::Var x) {
            return ad::log_softmax_rows(ad::matmul(ad::row_l2_normalize(x), ad::transpose(x)), 2.0);
        });
    };
    EXPECT_EQ(run(), run());
}

} // namespace
} // namespace rkd
