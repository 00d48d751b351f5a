// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rkd/matrix.hpp"

namespace rkd {

struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::size_t> counts;
};

/// Relational comparison of two embedding sets of the same examples, the
/// first acting as teacher.
struct DivergenceReport {
    std::size_t rows_total = 0;
    std::size_t rows_used = 0;
    bool subsampled = false;
    std::uint64_t seed = 0;
    std::size_t dim_a = 0;
    std::size_t dim_b = 0;
    double distance_divergence = 0.0;
    double angle_divergence = 0.0;
    Histogram distance_potentials_a;
    Histogram distance_potentials_b;
    Histogram angle_potentials_a;
    Histogram angle_potentials_b;
};

inline constexpr std::size_t kDivergenceMaxRows = 512;
inline constexpr std::size_t kHistogramBins = 32;

/// Distance and angle losses plus potential histograms. Sets larger than
/// `max_rows` are reduced to a seeded subsample of `max_rows` rows (the same
/// rows from both sets). DomainError when row counts differ or are below 3.
DivergenceReport relational_divergence(const Matrix& a, const Matrix& b, std::uint64_t seed = 0,
                                       std::size_t max_rows = kDivergenceMaxRows);

DivergenceReport relational_divergence_report(const std::filesystem::path& a,
                                              const std::filesystem::path& b,
                                              std::uint64_t seed = 0);

std::string to_json(const DivergenceReport& report);

} // namespace rkd
