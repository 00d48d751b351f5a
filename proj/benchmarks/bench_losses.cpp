// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "rkd/autodiff.hpp"
#include "rkd/mlp.hpp"
#include "rkd/relational.hpp"
#include "rkd/retrieval.hpp"
#include "rkd/sampling.hpp"

namespace {

rkd::Matrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    rkd::Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = normal(rng);
    return m;
}

std::vector<rkd::Label> round_robin_labels(std::size_t n, std::size_t classes) {
    std::vector<rkd::Label> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<rkd::Label>(i % classes);
    return labels;
}

void BM_RkdDistance(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const rkd::Matrix teacher = gaussian(n, 16, 1), student = gaussian(n, 4, 2);
    for (auto _ : state) {
        rkd::ad::Tape tape;
        const rkd::ad::Var s = tape.leaf(student);
        const rkd::ad::Var loss = rkd::rkd_distance_loss(teacher, s);
        tape.backward(loss);
        benchmark::DoNotOptimize(s.grad().data().data());
    }
}
BENCHMARK(BM_RkdDistance)->Arg(32)->Arg(64);

void BM_RkdAngle(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const rkd::Matrix teacher = gaussian(n, 16, 1), student = gaussian(n, 4, 2);
    for (auto _ : state) {
        rkd::ad::Tape tape;
        const rkd::ad::Var s = tape.leaf(student);
        const rkd::ad::Var loss = rkd::rkd_angle_loss(teacher, s);
        tape.backward(loss);
        benchmark::DoNotOptimize(s.grad().data().data());
    }
}
BENCHMARK(BM_RkdAngle)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_RecallAtK(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const rkd::Matrix e = gaussian(n, 16, 3);
    const auto labels = round_robin_labels(n, 8);
    const std::vector<std::size_t> ks{1, 2, 4, 8};
    for (auto _ : state) benchmark::DoNotOptimize(rkd::recall_at_k(e, labels, ks));
}
BENCHMARK(BM_RecallAtK)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_DistanceWeightedSampling(benchmark::State& state) {
    const rkd::Matrix e = gaussian(64, 16, 4);
    const auto labels = round_robin_labels(64, 8);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(rkd::distance_weighted_triplets(e, labels, ++seed));
}
BENCHMARK(BM_DistanceWeightedSampling);

void BM_MlpForward(benchmark::State& state) {
    const rkd::MlpSpec spec{{32, 64, 16}, rkd::Activation::kRelu, true, 0};
    const rkd::Model model{spec, rkd::init_params(spec, 5)};
    const rkd::Matrix x = gaussian(800, 32, 6);
    for (auto _ : state) benchmark::DoNotOptimize(rkd::forward(model, x));
}
BENCHMARK(BM_MlpForward)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
