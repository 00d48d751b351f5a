// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "rkd/training.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <random>
#include <set>

#include "rkd/error.hpp"
#include "rkd/relational.hpp"
#include "rkd/retrieval.hpp"

namespace rkd {

namespace {

struct LossInfo {
    LossKind kind;
    std::string_view name;
    bool needs_teacher;
    bool needs_logits;
};

constexpr std::array<LossInfo, 6> kLosses = {{
    {LossKind::kTriplet, "triplet", false, false},
    {LossKind::kCrossEntropy, "xent", false, true},
    {LossKind::kRkdDistance, "rkd-d", true, false},
    {LossKind::kRkdAngle, "rkd-a", true, false},
    {LossKind::kHkd, "hkd", true, true},
    {LossKind::kFitnet, "fitnet", true, false},
}};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t tag) {
    std::seed_seq seq{seed, a, b, tag};
    std::array<std::uint64_t, 1> out{};
    seq.generate(out.begin(), out.end());
    return out[0];
}

constexpr std::uint64_t kTripletTag = 0x7472;
constexpr std::uint64_t kProjectionTag = 0x7072;

} // namespace

std::string_view loss_name(LossKind kind) noexcept {
    for (const LossInfo& i : kLosses)
        if (i.kind == kind) return i.name;
    return "unknown";
}

std::optional<LossKind> parse_loss_kind(std::string_view name) noexcept {
    for (const LossInfo& i : kLosses)
        if (i.name == name) return i.kind;
    return std::nullopt;
}

bool requires_teacher(LossKind kind) noexcept {
    for (const LossInfo& i : kLosses)
        if (i.kind == kind) return i.needs_teacher;
    return false;
}

bool requires_logits(LossKind kind) noexcept {
    for (const LossInfo& i : kLosses)
        if (i.kind == kind) return i.needs_logits;
    return false;
}

void DistillConfig::validate() const {
    student.validate();
    bool any_positive = false;
    std::set<LossKind> seen;
    for (const LossTerm& t : losses) {
        if (!(t.weight >= 0.0) || !std::isfinite(t.weight)) {
            throw ConfigError("loss weight for '" + std::string(loss_name(t.kind)) +
                              "' must be a non-negative finite number");
        }
        if (!seen.insert(t.kind).second) {
            throw ConfigError("loss '" + std::string(loss_name(t.kind)) + "' listed twice");
        }
        any_positive = any_positive || t.weight > 0.0;
    }
    if (!any_positive) throw ConfigError("configuration needs at least one loss term with positive weight");
    if (epochs == 0) throw ConfigError("epochs must be positive");
    if (batch.per_class == 0 || batch.batch_size % batch.per_class != 0) {
        throw ConfigError("batch size must be a positive multiple of per-class count");
    }
    if (!(base_learning_rate(optimizer) >= 0.0)) throw ConfigError("learning rate must be non-negative");
    if (margin < 0.0) throw ConfigError("triplet margin must be non-negative");
    if (!(hkd_temperature > 0.0)) throw ConfigError("hkd temperature must be positive");
    for (const LrMilestone& m : lr_milestones)
        if (!(m.factor > 0.0)) throw ConfigError("learning-rate milestone factor must be positive");
    for (std::size_t k : recall_ks)
        if (k == 0) throw ConfigError("recall K must be positive");
}

bool DistillConfig::has_active(LossKind kind) const noexcept { return weight(kind) > 0.0; }

double DistillConfig::weight(LossKind kind) const noexcept {
    for (const LossTerm& t : losses)
        if (t.kind == kind) return t.weight;
    return 0.0;
}

double learning_rate_at(const DistillConfig& cfg, std::size_t epoch) {
    double lr = base_learning_rate(cfg.optimizer);
    for (const LrMilestone& m : cfg.lr_milestones)
        if (epoch >= m.epoch) lr *= m.factor;
    return lr;
}

std::vector<LrMilestone> scaled_milestones(std::size_t epochs, std::span<const std::size_t> base_epochs,
                                           std::size_t base_total, double factor) {
    std::vector<LrMilestone> out;
    for (std::size_t e : base_epochs) {
        const auto scaled = static_cast<std::size_t>(
            std::llround(static_cast<double>(e) * static_cast<double>(epochs) / static_cast<double>(base_total)));
        out.push_back({scaled, factor});
    }
    return out;
}

DistillConfig metric_rkd_preset(MlpSpec student) {
    DistillConfig cfg;
    cfg.student = std::move(student);
    cfg.losses = {{LossKind::kRkdDistance, 1.0}, {LossKind::kRkdAngle, 2.0}};
    cfg.optimizer = Adam{};
    return cfg;
}

DistillConfig classification_preset(MlpSpec student, std::size_t epochs) {
    DistillConfig cfg;
    cfg.student = std::move(student);
    cfg.losses = {{LossKind::kCrossEntropy, 1.0},
                  {LossKind::kHkd, 16.0},
                  {LossKind::kRkdDistance, 25.0},
                  {LossKind::kRkdAngle, 50.0}};
    cfg.optimizer = SgdMomentum{0.1, 0.9, 5e-4};
    cfg.epochs = epochs;
    constexpr std::array<std::size_t, 3> kBase = {60, 120, 160};
    cfg.lr_milestones = scaled_milestones(epochs, kBase, 200, 0.2);
    return cfg;
}

Objective combined_objective(const DistillConfig& cfg, const ObjectiveInputs& in) {
    Objective obj;
    std::optional<ad::Var> total;
    for (const LossTerm& term : cfg.losses) {
        if (term.weight == 0.0) continue;
        const std::string name(loss_name(term.kind));
        if (requires_teacher(term.kind) && in.teacher_embedding == nullptr) {
            throw ConfigError("loss '" + name + "' requires a teacher");
        }
        if (requires_logits(term.kind) && !in.student_logits) {
            throw ConfigError("loss '" + name + "' requires a student classifier head");
        }
        ad::Var value;
        switch (term.kind) {
        case LossKind::kTriplet:
            if (in.triplets == nullptr) throw ConfigError("triplet loss requires sampled triplets");
            value = triplet_loss(in.student_embedding, *in.triplets, cfg.margin);
            break;
        case LossKind::kCrossEntropy:
            value = cross_entropy_loss(*in.student_logits, in.labels);
            break;
        case LossKind::kRkdDistance:
            value = rkd_distance_loss(*in.teacher_embedding, in.student_embedding);
            break;
        case LossKind::kRkdAngle:
            value = rkd_angle_loss(*in.teacher_embedding, in.student_embedding);
            break;
        case LossKind::kHkd:
            if (in.teacher_logits == nullptr) throw ConfigError("hkd requires teacher logits");
            value = hkd_loss(*in.teacher_logits, *in.student_logits, cfg.hkd_temperature, cfg.hkd_tau_squared);
            break;
        case LossKind::kFitnet:
            if (in.projection == nullptr) throw ConfigError("fitnet requires a projection");
            value = ikd_l2_loss(*in.teacher_embedding, in.student_embedding, *in.projection);
            break;
        }
        obj.terms.push_back({term.kind, term.weight, value.value().item()});
        ad::Var weighted = ad::scale(value, term.weight);
        total = total ? ad::add(*total, weighted) : weighted;
    }
    if (!total) throw ConfigError("objective has no active loss terms");
    obj.total = *total;
    return obj;
}

TrainResult train(const DistillConfig& cfg, const TrainInputs& inputs) {
    using Clock = std::chrono::steady_clock;
    cfg.validate();
    if (inputs.data == nullptr) throw ConfigError("train: no training data");
    const EmbeddingBatch& data = *inputs.data;
    const EmbeddingBatch& eval = inputs.eval ? *inputs.eval : data;
    if (data.labels.size() != data.size()) throw DimensionError("train: label count does not match data rows");
    if (data.dim() != cfg.student.input_dim()) {
        throw ConfigError("student " + cfg.student.to_string() + " expects input width " +
                          std::to_string(cfg.student.input_dim()) + ", data has " + std::to_string(data.dim()));
    }

    const Model* teacher = inputs.teacher;
    bool needs_logits = false;
    for (const LossTerm& t : cfg.losses) {
        if (t.weight == 0.0) continue;
        if (requires_teacher(t.kind) && teacher == nullptr) {
            throw ConfigError("loss '" + std::string(loss_name(t.kind)) + "' requires a teacher");
        }
        needs_logits = needs_logits || requires_logits(t.kind);
    }
    if (needs_logits && !cfg.student.has_classifier()) {
        throw ConfigError("classification losses need a student classifier head");
    }
    if (cfg.student.has_classifier()) {
        for (Label l : data.labels)
            if (l >= cfg.student.classifier_classes) {
                throw ConfigError("label " + std::to_string(l) + " exceeds classifier size " +
                                  std::to_string(cfg.student.classifier_classes));
            }
    }
    if (cfg.has_active(LossKind::kTriplet) && cfg.batch.batch_size / cfg.batch.per_class < 2) {
        throw ConfigError("triplet loss needs at least two classes per batch");
    }

    // Teacher outputs are constants, computed once for the whole dataset.
    std::optional<MlpEvaluation> teacher_out;
    if (teacher != nullptr) {
        check_parameters(teacher->spec, teacher->params);
        if (teacher->spec.input_dim() != data.dim()) {
            throw ConfigError("teacher " + teacher->spec.to_string() + " does not accept data of width " +
                              std::to_string(data.dim()));
        }
        if (cfg.has_active(LossKind::kHkd)) {
            if (!teacher->spec.has_classifier() ||
                teacher->spec.classifier_classes != cfg.student.classifier_classes) {
                throw ConfigError("hkd needs teacher and student classifiers with the same class count");
            }
        }
        teacher_out = forward(*teacher, data.embeddings);
    }

    Parameters start = inputs.init ? *inputs.init : init_params(cfg.student, cfg.seed);
    check_parameters(cfg.student, start);
    std::vector<Matrix> state = std::move(start.tensors);
    const std::size_t student_tensors = state.size();

    std::optional<std::size_t> projection_slot;
    if (cfg.has_active(LossKind::kFitnet)) {
        const std::size_t td = teacher->spec.embedding_dim();
        const std::size_t sd = cfg.student.embedding_dim();
        MlpSpec proj_spec{{sd, td}};
        Parameters proj = init_params(proj_spec, derive_seed(cfg.seed, 0, 0, kProjectionTag));
        projection_slot = state.size();
        state.push_back(std::move(proj.tensors[0]));
        state.push_back(std::move(proj.tensors[1]));
    }

    Optimizer optimizer(cfg.optimizer, state);
    TrainResult result;
    std::vector<std::size_t> ks;
    for (std::size_t k : cfg.recall_ks)
        if (k < eval.size()) ks.push_back(k);

    const auto started = Clock::now();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = learning_rate_at(cfg, epoch);
        const auto batches =
            class_balanced_batches(data.labels, cfg.batch.batch_size, cfg.batch.per_class, cfg.seed, epoch);
        if (batches.empty()) throw ConfigError("training data cannot fill a single batch");

        std::vector<double> term_sums;
        double total_sum = 0.0;
        for (std::size_t step = 0; step < batches.size(); ++step) {
            const auto& batch = batches[step];
            ad::Tape tape;
            MlpVars vars;
            for (std::size_t t = 0; t < student_tensors; ++t) vars.tensors.push_back(tape.leaf(state[t]));
            std::optional<ProjectionVars> projection;
            if (projection_slot) {
                projection = ProjectionVars{tape.leaf(state[*projection_slot]), tape.leaf(state[*projection_slot + 1])};
            }
            const MlpOutput out = forward(vars, cfg.student, tape.constant(gather_rows(data.embeddings, batch)));

            std::vector<Label> labels(batch.size());
            for (std::size_t i = 0; i < batch.size(); ++i) labels[i] = data.labels[batch[i]];

            Matrix teacher_embedding, teacher_logits;
            ObjectiveInputs in;
            in.student_embedding = out.embedding;
            in.student_logits = out.logits;
            in.labels = labels;
            if (teacher_out) {
                teacher_embedding = gather_rows(teacher_out->embedding, batch);
                in.teacher_embedding = &teacher_embedding;
                if (teacher_out->logits) {
                    teacher_logits = gather_rows(*teacher_out->logits, batch);
                    in.teacher_logits = &teacher_logits;
                }
            }
            TripletIndexBatch triplets;
            if (cfg.has_active(LossKind::kTriplet)) {
                triplets = distance_weighted_triplets(out.embedding.value(), labels,
                                                      derive_seed(cfg.seed, epoch, step, kTripletTag), cfg.sampler);
                in.triplets = &triplets;
            }
            if (projection) in.projection = &*projection;

            const Objective obj = combined_objective(cfg, in);
            for (const TermValue& t : obj.terms) {
                if (!std::isfinite(t.value)) {
                    throw TrainingError("non-finite value in loss term '" + std::string(loss_name(t.kind)) +
                                        "' at epoch " + std::to_string(epoch + 1) + ", step " +
                                        std::to_string(step + 1));
                }
            }
            const double total = obj.total.value().item();
            if (!std::isfinite(total)) {
                throw TrainingError("non-finite total loss at epoch " + std::to_string(epoch + 1));
            }
            term_sums.resize(obj.terms.size(), 0.0);
            for (std::size_t i = 0; i < obj.terms.size(); ++i) term_sums[i] += obj.terms[i].value;
            total_sum += total;

            tape.backward(obj.total);
            std::vector<Matrix> grads = gradients(vars);
            if (projection) {
                grads.push_back(projection->weight.grad());
                grads.push_back(projection->bias.grad());
            }
            optimizer.step(state, grads, lr);
        }

        MetricsRecord record;
        record.epoch = epoch + 1;
        record.learning_rate = lr;
        const double steps = static_cast<double>(batches.size());
        std::size_t slot = 0;
        for (const LossTerm& t : cfg.losses) {
            if (t.weight == 0.0) continue;
            record.losses.emplace_back(std::string(loss_name(t.kind)), term_sums[slot++] / steps);
        }
        record.losses.emplace_back("total", total_sum / steps);

        const Model current{cfg.student, Parameters{{state.begin(), state.begin() + student_tensors}}};
        const MlpEvaluation ev = forward(current, eval.embeddings);
        if (eval.size() >= 2 && !ks.empty()) {
            const auto recall = recall_at_k(ev.embedding, eval.labels, ks);
            for (std::size_t i = 0; i < ks.size(); ++i) record.recall.emplace_back(ks[i], recall[i]);
        }
        if (ev.logits && !eval.labels.empty()) record.accuracy = accuracy(*ev.logits, eval.labels);
        record.wall_seconds = std::chrono::duration<double>(Clock::now() - started).count();
        if (inputs.on_epoch) inputs.on_epoch(record);
        result.metrics.push_back(std::move(record));
    }

    result.model.spec = cfg.student;
    result.model.params.tensors.assign(std::make_move_iterator(state.begin()),
                                       std::make_move_iterator(state.begin() + student_tensors));
    if (projection_slot) {
        result.projection = ProjectionParams{std::move(state[*projection_slot]), std::move(state[*projection_slot + 1])};
    }
    return result;
}

SelfDistillResult self_distill(const DistillConfig& base, const Model& initial_teacher,
                               const EmbeddingBatch& data, const EmbeddingBatch* eval,
                               std::size_t generations, const std::filesystem::path& out_dir,
                               const std::function<void(const MetricsRecord&)>& on_epoch) {
    if (generations == 0) throw ConfigError("self-distillation needs at least one generation");
    if (!base.student.widths.empty() && base.student.widths != initial_teacher.spec.widths) {
        throw ConfigError("self-distillation student " + base.student.to_string() +
                          " must match teacher " + initial_teacher.spec.to_string());
    }
    std::filesystem::create_directories(out_dir);

    SelfDistillResult result;
    Model teacher = initial_teacher;
    std::filesystem::path teacher_path = out_dir / "gen0.rkdp";
    save_params(teacher_path, teacher);

    for (std::size_t g = 1; g <= generations; ++g) {
        DistillConfig cfg = base;
        cfg.student = teacher.spec;
        cfg.student.l2_normalize = false;
        cfg.seed = base.seed + g;
        cfg.teacher_path = teacher_path.string();

        TrainInputs in;
        in.data = &data;
        in.teacher = &teacher;
        in.eval = eval;
        if (on_epoch) {
            in.on_epoch = [&](const MetricsRecord& r) {
                MetricsRecord tagged = r;
                tagged.generation = g;
                on_epoch(tagged);
            };
        }
        TrainResult trained = train(cfg, in);

        GenerationRecord record;
        record.generation = g;
        record.teacher_path = teacher_path;
        record.student_path = out_dir / ("gen" + std::to_string(g) + ".rkdp");
        save_params(record.student_path, trained.model);
        if (!trained.metrics.empty()) record.recall = trained.metrics.back().recall;
        result.records.push_back(record);

        teacher = std::move(trained.model);
        teacher_path = record.student_path;
    }
    result.final_model = std::move(teacher);
    return result;
}

} // namespace rkd
