// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rkd/config.hpp"
#include "rkd/divergence.hpp"
#include "rkd/embedding_io.hpp"
#include "rkd/error.hpp"
#include "rkd/mlp.hpp"
#include "rkd/retrieval.hpp"
#include "rkd/synthetic.hpp"
#include "rkd/training.hpp"

namespace rkd::cli {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep))
        if (!item.empty()) parts.push_back(item);
    return parts;
}

std::size_t parse_count(const std::string& text, const char* what) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size() || v < 0) throw std::invalid_argument(text);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ConfigError(std::string("invalid ") + what + " '" + text + "'");
    }
}

std::vector<std::size_t> parse_counts(const std::string& text, const char* what) {
    std::vector<std::size_t> out;
    for (const std::string& part : split(text, ',')) out.push_back(parse_count(part, what));
    if (out.empty()) throw ConfigError(std::string("empty ") + what + " list");
    return out;
}

std::vector<LossTerm> parse_losses(const std::string& text) {
    std::vector<LossTerm> terms;
    for (const std::string& part : split(text, ',')) {
        const auto eq = part.find('=');
        const std::string name = part.substr(0, eq);
        const auto kind = parse_loss_kind(name);
        if (!kind) throw ConfigError("unknown loss '" + name + "'");
        double weight = 1.0;
        if (eq != std::string::npos) {
            try {
                std::size_t used = 0;
                weight = std::stod(part.substr(eq + 1), &used);
                if (used != part.size() - eq - 1) throw std::invalid_argument(part);
            } catch (const std::exception&) {
                throw ConfigError("invalid weight in '" + part + "'");
            }
        }
        terms.push_back({*kind, weight});
    }
    if (terms.empty()) throw ConfigError("no loss terms given");
    return terms;
}

/// Features with labels, optionally taking labels from a second RKEB file.
EmbeddingBatch load_data(const std::string& data_path, const std::string& labels_path) {
    EmbeddingBatch data = read_embeddings(data_path);
    if (!labels_path.empty()) {
        EmbeddingBatch labels = read_embeddings(labels_path);
        if (labels.size() != data.size()) {
            throw DomainError("label file has " + std::to_string(labels.size()) + " rows, data has " +
                              std::to_string(data.size()));
        }
        data.labels = std::move(labels.labels);
    }
    return data;
}

std::size_t class_count(const EmbeddingBatch& data) {
    Label top = 0;
    for (Label l : data.labels) top = std::max(top, l);
    return data.labels.empty() ? 0 : static_cast<std::size_t>(top) + 1;
}

/// Options shared by the training subcommands; applied on top of a config
/// file or preset only when given explicitly.
struct TrainingFlags {
    std::string config_path;
    std::string data_path;
    std::string labels_path;
    std::string eval_path;
    std::string metrics_path;
    std::string out_path;
    std::size_t epochs = 0;
    double lr = 0.0;
    std::string optimizer;
    double momentum = 0.9;
    double weight_decay = 0.0;
    std::size_t batch_size = 0;
    std::size_t per_class = 0;
    std::uint64_t seed = 0;
    double margin = 0.2;
    double temperature = 4.0;
    bool tau_squared = false;
    bool uniform_sampling = false;

    CLI::Option* epochs_opt = nullptr;
    CLI::Option* lr_opt = nullptr;
    CLI::Option* optimizer_opt = nullptr;
    CLI::Option* momentum_opt = nullptr;
    CLI::Option* weight_decay_opt = nullptr;
    CLI::Option* batch_opt = nullptr;
    CLI::Option* per_class_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* margin_opt = nullptr;
    CLI::Option* temperature_opt = nullptr;
    CLI::Option* tau_squared_opt = nullptr;
    CLI::Option* uniform_opt = nullptr;

    void attach(CLI::App* app, bool needs_out_file) {
        app->add_option("--config", config_path, "JSON training configuration");
        app->add_option("--data", data_path, "training features (RKEB)")->required();
        app->add_option("--labels", labels_path, "RKEB file whose labels replace those in --data");
        app->add_option("--eval-data", eval_path, "held-out RKEB set for per-epoch recall/accuracy");
        app->add_option("--metrics", metrics_path, "write per-epoch JSON lines here");
        app->add_option("--out", out_path, needs_out_file ? "output parameter file" : "output directory")->required();
        epochs_opt = app->add_option("--epochs", epochs, "training epochs");
        lr_opt = app->add_option("--lr", lr, "base learning rate");
        optimizer_opt = app->add_option("--optimizer", optimizer, "adam or sgd")->check(CLI::IsMember({"adam", "sgd"}));
        momentum_opt = app->add_option("--momentum", momentum, "SGD momentum");
        weight_decay_opt = app->add_option("--weight-decay", weight_decay, "SGD weight decay");
        batch_opt = app->add_option("--batch-size", batch_size, "examples per batch");
        per_class_opt = app->add_option("--per-class", per_class, "examples per class in a batch");
        seed_opt = app->add_option("--seed", seed, "random seed");
        margin_opt = app->add_option("--margin", margin, "triplet margin");
        temperature_opt = app->add_option("--temperature", temperature, "hkd temperature");
        tau_squared_opt = app->add_flag("--tau-squared", tau_squared, "scale hkd by temperature^2");
        uniform_opt = app->add_flag("--uniform-negatives", uniform_sampling, "uniform negative sampling");
    }

    DistillConfig base_config() const {
        return config_path.empty() ? DistillConfig{} : load_config(config_path);
    }

    void apply(DistillConfig& cfg) const {
        if (optimizer_opt->count()) {
            const double lr_keep = base_learning_rate(cfg.optimizer);
            if (optimizer == "sgd") cfg.optimizer = SgdMomentum{lr_keep, 0.9, 0.0};
            else cfg.optimizer = Adam{lr_keep};
        }
        if (lr_opt->count()) std::visit([&](auto& o) { o.lr = lr; }, cfg.optimizer);
        if (auto* sgd = std::get_if<SgdMomentum>(&cfg.optimizer)) {
            if (momentum_opt->count()) sgd->momentum = momentum;
            if (weight_decay_opt->count()) sgd->weight_decay = weight_decay;
        }
        if (epochs_opt->count()) cfg.epochs = epochs;
        if (batch_opt->count()) cfg.batch.batch_size = batch_size;
        if (per_class_opt->count()) cfg.batch.per_class = per_class;
        if (seed_opt->count()) cfg.seed = seed;
        if (margin_opt->count()) cfg.margin = margin;
        if (temperature_opt->count()) cfg.hkd_temperature = temperature;
        if (tau_squared_opt->count()) cfg.hkd_tau_squared = tau_squared;
        if (uniform_opt->count()) cfg.sampler.uniform = uniform_sampling;
    }
};

class MetricsWriter {
public:
    explicit MetricsWriter(const std::string& path) {
        if (path.empty()) return;
        out_.open(path, std::ios::trunc);
        if (!out_) throw FormatError("cannot open metrics file '" + path + "'");
    }
    std::function<void(const MetricsRecord&)> sink() {
        if (!out_.is_open()) return {};
        return [this](const MetricsRecord& r) { out_ << to_json_line(r) << '\n' << std::flush; };
    }

private:
    std::ofstream out_;
};

void print_recall(std::ostream& out, std::span<const std::size_t> ks, std::span<const double> recall) {
    for (std::size_t i = 0; i < ks.size(); ++i) {
        out << "recall@" << ks[i] << " = " << std::fixed << std::setprecision(4) << recall[i] << '\n';
    }
}

int gen_data(const SyntheticSpec& spec, const std::string& split, const std::string& out_path,
             std::ostream& out, std::ostream& err) {
    if (spec.overlapping()) err << "warning: cluster spread >= separation; classes will overlap\n";
    const EmbeddingBatch data = gen_synthetic(spec, split == "test" ? 1 : 0);
    write_embeddings(out_path, data);
    out << "wrote " << data.size() << " x " << data.dim() << " (" << spec.classes << " classes) to "
        << out_path << '\n';
    return kExitOk;
}

int train_teacher(const TrainingFlags& flags, const std::string& arch, const std::string& loss, bool l2norm,
                  std::size_t classes, std::ostream& out) {
    DistillConfig cfg = flags.base_config();
    const EmbeddingBatch data = load_data(flags.data_path, flags.labels_path);
    if (!arch.empty()) cfg.student.widths = parse_counts(arch, "architecture");
    if (cfg.student.widths.empty()) throw ConfigError("--arch is required");
    if (l2norm) cfg.student.l2_normalize = true;
    if (loss == "xent") {
        cfg.student.classifier_classes = classes ? classes : class_count(data);
        cfg.losses = {{LossKind::kCrossEntropy, 1.0}};
    } else if (cfg.losses.empty() || !loss.empty()) {
        cfg.losses = {{LossKind::kTriplet, 1.0}};
    }
    flags.apply(cfg);
    cfg.teacher_path.reset();
    for (const LossTerm& t : cfg.losses)
        if (requires_teacher(t.kind)) throw ConfigError("teacher training cannot use distillation losses");

    std::optional<EmbeddingBatch> eval;
    if (!flags.eval_path.empty()) eval = load_data(flags.eval_path, "");
    MetricsWriter metrics(flags.metrics_path);
    TrainInputs in;
    in.data = &data;
    in.eval = eval ? &*eval : nullptr;
    in.on_epoch = metrics.sink();
    const TrainResult result = train(cfg, in);
    save_params(flags.out_path, result.model);
    out << "teacher " << result.model.spec.to_string() << " saved to " << flags.out_path << '\n';
    if (!result.metrics.empty()) {
        const auto& last = result.metrics.back();
        for (const auto& [k, r] : last.recall)
            out << "recall@" << k << " = " << std::fixed << std::setprecision(4) << r << '\n';
        if (last.accuracy) out << "accuracy = " << std::fixed << std::setprecision(4) << *last.accuracy << '\n';
    }
    return kExitOk;
}

int distill(const TrainingFlags& flags, const std::string& teacher_path, const std::string& student_arch,
            const std::string& losses, bool losses_given, bool no_l2norm, std::ostream& out) {
    DistillConfig cfg = flags.base_config();
    if (!teacher_path.empty()) cfg.teacher_path = teacher_path;
    if (!cfg.teacher_path) throw ConfigError("--teacher is required");
    const Model teacher = load_params(*cfg.teacher_path);
    const EmbeddingBatch data = load_data(flags.data_path, flags.labels_path);

    if (!student_arch.empty()) cfg.student.widths = parse_counts(student_arch, "architecture");
    if (cfg.student.widths.empty()) throw ConfigError("--student-arch is required");
    if (losses_given || cfg.losses.empty()) cfg.losses = parse_losses(losses);
    if (flags.config_path.empty()) cfg.student.l2_normalize = !no_l2norm;
    else if (no_l2norm) cfg.student.l2_normalize = false;
    bool needs_logits = false;
    for (const LossTerm& t : cfg.losses) needs_logits = needs_logits || (t.weight > 0 && requires_logits(t.kind));
    if (needs_logits && cfg.student.classifier_classes == 0) {
        cfg.student.classifier_classes =
            teacher.spec.has_classifier() ? teacher.spec.classifier_classes : class_count(data);
    }
    flags.apply(cfg);

    std::optional<EmbeddingBatch> eval;
    if (!flags.eval_path.empty()) eval = load_data(flags.eval_path, "");
    MetricsWriter metrics(flags.metrics_path);
    TrainInputs in;
    in.data = &data;
    in.teacher = &teacher;
    in.eval = eval ? &*eval : nullptr;
    in.on_epoch = metrics.sink();
    const TrainResult result = train(cfg, in);
    save_params(flags.out_path, result.model);
    out << "student " << result.model.spec.to_string() << " saved to " << flags.out_path << '\n';
    if (!result.metrics.empty()) {
        const auto& last = result.metrics.back();
        for (const auto& [k, r] : last.recall)
            out << "recall@" << k << " = " << std::fixed << std::setprecision(4) << r << '\n';
        if (last.accuracy) out << "accuracy = " << std::fixed << std::setprecision(4) << *last.accuracy << '\n';
    }
    return kExitOk;
}

int self_distill_cmd(const TrainingFlags& flags, const std::string& teacher_path, std::size_t generations,
                     const std::string& losses, bool losses_given, std::ostream& out) {
    DistillConfig cfg = flags.base_config();
    if (!teacher_path.empty()) cfg.teacher_path = teacher_path;
    if (!cfg.teacher_path) throw ConfigError("--teacher is required");
    const Model teacher = load_params(*cfg.teacher_path);
    const EmbeddingBatch data = load_data(flags.data_path, flags.labels_path);
    if (losses_given || cfg.losses.empty()) cfg.losses = parse_losses(losses);
    flags.apply(cfg);

    std::optional<EmbeddingBatch> eval;
    if (!flags.eval_path.empty()) eval = load_data(flags.eval_path, "");
    MetricsWriter metrics(flags.metrics_path);
    const SelfDistillResult result = self_distill(cfg, teacher, data, eval ? &*eval : nullptr, generations,
                                                  flags.out_path, metrics.sink());
    for (const GenerationRecord& r : result.records) {
        out << "gen " << r.generation << ": teacher " << r.teacher_path.string() << " -> student "
            << r.student_path.string();
        for (const auto& [k, v] : r.recall) out << "  recall@" << k << "=" << std::fixed << std::setprecision(4) << v;
        out << '\n';
    }
    return kExitOk;
}

int eval_cmd(const std::string& model_path, const std::string& data_path, const std::string& labels_path,
             const std::string& ks_text, std::ostream& out) {
    const EmbeddingBatch data = load_data(data_path, labels_path);
    const std::vector<std::size_t> ks = parse_counts(ks_text, "recall K");
    Matrix embeddings = data.embeddings;
    std::optional<Matrix> logits;
    if (!model_path.empty()) {
        const Model model = load_params(model_path);
        MlpEvaluation ev = forward(model, data.embeddings);
        embeddings = std::move(ev.embedding);
        logits = std::move(ev.logits);
    }
    print_recall(out, ks, recall_at_k(embeddings, data.labels, ks));
    if (logits) out << "accuracy = " << std::fixed << std::setprecision(4) << accuracy(*logits, data.labels) << '\n';
    return kExitOk;
}

int embed_cmd(const std::string& model_path, const std::string& data_path, const std::string& out_path,
              std::ostream& out) {
    const Model model = load_params(model_path);
    const EmbeddingBatch data = read_embeddings(data_path);
    const EmbeddingBatch embedded{forward(model, data.embeddings).embedding, data.labels};
    write_embeddings(out_path, embedded);
    out << "wrote " << embedded.size() << " x " << embedded.dim() << " embeddings to " << out_path << '\n';
    return kExitOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Relational knowledge distillation toolkit", "rkd"};
    app.require_subcommand(1, 1);

    SyntheticSpec synth;
    std::string split = "train";
    std::string gen_out;
    CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic Gaussian-cluster dataset");
    gen->add_option("--classes", synth.classes, "number of classes");
    gen->add_option("--per-class", synth.per_class, "points per class");
    gen->add_option("--dim", synth.ambient_dim, "ambient dimension");
    gen->add_option("--spread", synth.cluster_spread, "within-class standard deviation");
    gen->add_option("--separation", synth.inter_class_separation, "radius of the class-centre sphere");
    gen->add_option("--seed", synth.seed, "random seed");
    gen->add_option("--split", split, "train or test noise draw")->check(CLI::IsMember({"train", "test"}));
    gen->add_option("--out", gen_out, "output RKEB file")->required();

    TrainingFlags teacher_flags;
    std::string arch, teacher_loss;
    bool l2norm = false;
    std::size_t classes = 0;
    CLI::App* tt = app.add_subcommand("train-teacher", "train a network without a teacher");
    teacher_flags.attach(tt, true);
    tt->add_option("--arch", arch, "layer widths, e.g. 32,64,16");
    tt->add_option("--loss", teacher_loss, "triplet or xent")->check(CLI::IsMember({"triplet", "xent"}));
    tt->add_flag("--l2norm", l2norm, "L2-normalise the embedding");
    tt->add_option("--classes", classes, "classifier size for xent (default: max label + 1)");

    TrainingFlags distill_flags;
    std::string teacher_path, student_arch, losses = "rkd-d=1,rkd-a=2";
    bool no_l2norm = false;
    CLI::App* ds = app.add_subcommand("distill", "distill a teacher into a student");
    distill_flags.attach(ds, true);
    ds->add_option("--teacher", teacher_path, "teacher parameter file (RKDP)");
    ds->add_option("--student-arch", student_arch, "student layer widths");
    CLI::Option* losses_opt = ds->add_option("--losses", losses, "weighted terms, e.g. rkd-d=1,rkd-a=2");
    ds->add_flag("--no-l2norm", no_l2norm, "do not L2-normalise student embeddings");

    TrainingFlags self_flags;
    std::string self_teacher, self_losses = "rkd-d=1,rkd-a=2";
    std::size_t generations = 1;
    CLI::App* sd = app.add_subcommand("self-distill", "distill a model into its own architecture over generations");
    self_flags.attach(sd, false);
    sd->add_option("--teacher", self_teacher, "initial teacher (RKDP)");
    sd->add_option("--generations", generations, "number of generations")->check(CLI::PositiveNumber);
    CLI::Option* self_losses_opt = sd->add_option("--losses", self_losses, "weighted terms");

    std::string eval_model, eval_data, eval_labels, eval_ks = "1,2,4,8";
    CLI::App* ev = app.add_subcommand("eval", "recall@K of a model's embeddings (or of raw embeddings)");
    ev->add_option("--model", eval_model, "parameter file; omit to evaluate --data directly");
    ev->add_option("--data", eval_data, "RKEB features or embeddings")->required();
    ev->add_option("--labels", eval_labels, "RKEB file whose labels replace those in --data");
    ev->add_option("--recall", eval_ks, "comma-separated K values");

    std::string embed_model, embed_data, embed_out;
    CLI::App* em = app.add_subcommand("embed", "write a model's embeddings of a dataset");
    em->add_option("--model", embed_model, "parameter file")->required();
    em->add_option("--data", embed_data, "RKEB features")->required();
    em->add_option("--out", embed_out, "output RKEB file")->required();

    std::string cmp_a, cmp_b;
    std::uint64_t cmp_seed = 0;
    CLI::App* cmp = app.add_subcommand("compare", "relational divergence between two embedding files");
    cmp->add_option("--a", cmp_a, "reference (teacher) embeddings")->required();
    cmp->add_option("--b", cmp_b, "compared (student) embeddings")->required();
    cmp->add_option("--seed", cmp_seed, "subsampling seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitConfig;
    }

    try {
        if (gen->parsed()) return gen_data(synth, split, gen_out, out, err);
        if (tt->parsed()) return train_teacher(teacher_flags, arch, teacher_loss, l2norm, classes, out);
        if (ds->parsed())
            return distill(distill_flags, teacher_path, student_arch, losses, losses_opt->count() > 0, no_l2norm, out);
        if (sd->parsed())
            return self_distill_cmd(self_flags, self_teacher, generations, self_losses, self_losses_opt->count() > 0, out);
        if (ev->parsed()) return eval_cmd(eval_model, eval_data, eval_labels, eval_ks, out);
        if (em->parsed()) return embed_cmd(embed_model, embed_data, embed_out, out);
        if (cmp->parsed()) {
            out << to_json(relational_divergence_report(cmp_a, cmp_b, cmp_seed)) << '\n';
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ParameterError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const TrainingError& e) {
        err << "training failed: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitConfig;
}

} // namespace rkd::cli
