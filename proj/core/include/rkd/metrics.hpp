// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rkd {

/// One line of the training log, emitted once per epoch.
struct MetricsRecord {
    std::size_t epoch = 0;
    std::optional<std::size_t> generation;
    /// Mean unweighted value of each active loss term over the epoch's steps,
    /// plus "total" (the weighted objective).
    std::vector<std::pair<std::string, double>> losses;
    std::vector<std::pair<std::size_t, double>> recall;
    std::optional<double> accuracy;
    double learning_rate = 0.0;
    double wall_seconds = 0.0;
};

/// Single-line JSON object. `wall_seconds` is the only field that varies
/// between identical runs; pass include_timing = false to drop it.
std::string to_json_line(const MetricsRecord& record, bool include_timing = true);

} // namespace rkd
