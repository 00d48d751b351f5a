// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "rkd/metrics.hpp"

#include <json.hpp>

namespace rkd {

std::string to_json_line(const MetricsRecord& record, bool include_timing) {
    nlohmann::ordered_json j;
    if (record.generation) j["generation"] = *record.generation;
    j["epoch"] = record.epoch;
    nlohmann::ordered_json losses = nlohmann::ordered_json::object();
    for (const auto& [name, value] : record.losses) losses[name] = value;
    j["losses"] = std::move(losses);
    nlohmann::ordered_json recall = nlohmann::ordered_json::object();
    for (const auto& [k, value] : record.recall) recall[std::to_string(k)] = value;
    j["recall"] = std::move(recall);
    if (record.accuracy) j["accuracy"] = *record.accuracy;
    j["lr"] = record.learning_rate;
    if (include_timing) j["wall_seconds"] = record.wall_seconds;
    return j.dump();
}

} // namespace rkd
