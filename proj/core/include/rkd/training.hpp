// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rkd/baseline.hpp"
#include "rkd/metrics.hpp"
#include "rkd/mlp.hpp"
#include "rkd/optimizer.hpp"
#include "rkd/sampling.hpp"

namespace rkd {

enum class LossKind {
    kTriplet,
    kCrossEntropy,
    kRkdDistance,
    kRkdAngle,
    kHkd,
    kFitnet,
};

/// CLI/config spelling: triplet, xent, rkd-d, rkd-a, hkd, fitnet.
std::string_view loss_name(LossKind kind) noexcept;
std::optional<LossKind> parse_loss_kind(std::string_view name) noexcept;
bool requires_teacher(LossKind kind) noexcept;
bool requires_logits(LossKind kind) noexcept;

struct LossTerm {
    LossKind kind;
    double weight;

    friend bool operator==(const LossTerm&, const LossTerm&) = default;
};

struct BatchSpec {
    std::size_t batch_size = 40;
    std::size_t per_class = 5;
};

/// From `epoch` (0-based) on, the learning rate is multiplied by `factor`.
struct LrMilestone {
    std::size_t epoch;
    double factor;
};

struct DistillConfig {
    MlpSpec student;
    std::vector<LossTerm> losses;
    OptimizerSpec optimizer = Adam{};
    std::size_t epochs = 40;
    BatchSpec batch;
    std::vector<LrMilestone> lr_milestones;
    std::uint64_t seed = 0;
    std::optional<std::string> teacher_path;
    double margin = kDefaultTripletMargin;
    double hkd_temperature = kDefaultHkdTemperature;
    bool hkd_tau_squared = false;
    SamplerOptions sampler;
    std::vector<std::size_t> recall_ks = {1, 2, 4, 8};

    /// ConfigError unless some term has positive weight, weights are
    /// non-negative, and scalar settings are in range.
    void validate() const;
    bool has_active(LossKind kind) const noexcept;
    double weight(LossKind kind) const noexcept;
};

double learning_rate_at(const DistillConfig& cfg, std::size_t epoch);

/// Milestones at base_epochs scaled to an `epochs` budget, e.g. {60, 120, 160}
/// of 200 become {12, 24, 32} of 40.
std::vector<LrMilestone> scaled_milestones(std::size_t epochs, std::span<const std::size_t> base_epochs,
                                           std::size_t base_total, double factor);

/// Relational distillation for metric learning: rkd-d = 1, rkd-a = 2, no task
/// loss, Adam.
DistillConfig metric_rkd_preset(MlpSpec student);

/// Classification with cross-entropy + hkd 16 (tau 4) + rkd-d 25 + rkd-a 50,
/// SGD momentum 0.9, weight decay 5e-4, lr x0.2 at 30%/60%/80% of the epochs.
DistillConfig classification_preset(MlpSpec student, std::size_t epochs);

struct ObjectiveInputs {
    ad::Var student_embedding;
    std::optional<ad::Var> student_logits;
    const Matrix* teacher_embedding = nullptr;
    const Matrix* teacher_logits = nullptr;
    std::span<const Label> labels;
    const TripletIndexBatch* triplets = nullptr;
    const ProjectionVars* projection = nullptr;
};

struct TermValue {
    LossKind kind;
    double weight;
    double value;
};

struct Objective {
    ad::Var total;
    std::vector<TermValue> terms;
};

/// Sum of weight * loss over the configured terms with positive weight, in
/// configuration order. ConfigError when a term lacks its inputs.
Objective combined_objective(const DistillConfig& cfg, const ObjectiveInputs& inputs);

struct TrainInputs {
    const EmbeddingBatch* data = nullptr;
    /// Frozen; never modified.
    const Model* teacher = nullptr;
    /// Recall/accuracy are reported on this set (default: training data).
    const EmbeddingBatch* eval = nullptr;
    /// Starting student parameters (default: He initialisation from cfg.seed).
    const Parameters* init = nullptr;
    std::function<void(const MetricsRecord&)> on_epoch;
};

struct TrainResult {
    Model model;
    std::vector<MetricsRecord> metrics;
    std::optional<ProjectionParams> projection;
};

/// Runs cfg.epochs epochs of class-balanced mini-batch training. Deterministic
/// in (cfg, data, seed). TrainingError names the term and epoch when a loss
/// becomes non-finite.
TrainResult train(const DistillConfig& cfg, const TrainInputs& inputs);

struct GenerationRecord {
    std::size_t generation = 0;
    std::filesystem::path teacher_path;
    std::filesystem::path student_path;
    std::vector<std::pair<std::size_t, double>> recall;
};

struct SelfDistillResult {
    std::vector<GenerationRecord> records;
    Model final_model;
};

/// Repeated distillation into the teacher's own architecture (without L2
/// normalisation); generation g is taught by generation g-1. Snapshots are
/// written to out_dir/gen<g>.rkdp with gen0 the initial teacher.
SelfDistillResult self_distill(const DistillConfig& base, const Model& initial_teacher,
                               const EmbeddingBatch& data, const EmbeddingBatch* eval,
                               std::size_t generations, const std::filesystem::path& out_dir,
                               const std::function<void(const MetricsRecord&)>& on_epoch = {});

} // namespace rkd
