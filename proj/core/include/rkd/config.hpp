// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// JSON representation of DistillConfig. Every field is optional and falls back
// to its default; unknown keys and wrongly-typed values are ConfigErrors.
//
//   {
//     "student": {"widths": [32, 16, 4], "l2_normalize": false, "classes": 0},
//     "losses": [{"loss": "rkd-d", "weight": 1}, {"loss": "rkd-a", "weight": 2}],
//     "optimizer": {"kind": "adam", "lr": 0.001, "beta1": 0.9, "beta2": 0.999, "eps": 1e-8},
//     "epochs": 40,
//     "batch": {"size": 40, "per_class": 5},
//     "lr_milestones": [{"epoch": 12, "factor": 0.2}],
//     "seed": 0,
//     "teacher": "teacher.rkdp",
//     "margin": 0.2,
//     "hkd": {"temperature": 4, "tau_squared": false},
//     "sampler": {"cutoff": 0.5, "nonzero_loss_cutoff": 1.4, "uniform": false},
//     "recall_ks": [1, 2, 4, 8]
//   }

#include <filesystem>
#include <string>
#include <string_view>

#include "rkd/training.hpp"

namespace rkd {

DistillConfig parse_config(std::string_view json_text);
std::string dump_config(const DistillConfig& cfg);
DistillConfig load_config(const std::filesystem::path& path);

} // namespace rkd
