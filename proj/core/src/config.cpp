// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "rkd/config.hpp"

#include <initializer_list>
#include <type_traits>

#include <json.hpp>

#include "binary_io.hpp"
#include "rkd/error.hpp"

namespace rkd {

namespace {

using nlohmann::json;

void allow_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> keys) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (std::string_view k : keys) known = known || item.key() == k;
        if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + std::string(where));
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, std::string_view where) {
    if (!j.contains(key)) return;
    const auto not_count = [&] {
        return ConfigError("'" + std::string(key) + "' in " + std::string(where) + " must hold non-negative integers");
    };
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
        if (!j.at(key).is_number_unsigned()) throw not_count();
    } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
        if (!j.at(key).is_array()) throw not_count();
        for (const json& v : j.at(key))
            if (!v.is_number_unsigned()) throw not_count();
    }
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for '" + std::string(key) + "' in " + std::string(where));
    }
}

} // namespace

DistillConfig parse_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    allow_keys(root, "config",
               {"student", "losses", "optimizer", "epochs", "batch", "lr_milestones", "seed", "teacher",
                "margin", "hkd", "sampler", "recall_ks"});

    DistillConfig cfg;
    if (root.contains("student")) {
        const json& s = root["student"];
        allow_keys(s, "student", {"widths", "l2_normalize", "classes"});
        read(s, "widths", cfg.student.widths, "student");
        read(s, "l2_normalize", cfg.student.l2_normalize, "student");
        read(s, "classes", cfg.student.classifier_classes, "student");
    }
    if (root.contains("losses")) {
        if (!root["losses"].is_array()) throw ConfigError("losses must be an array");
        for (const json& term : root["losses"]) {
            allow_keys(term, "loss term", {"loss", "weight"});
            std::string name;
            double weight = 1.0;
            read(term, "loss", name, "loss term");
            read(term, "weight", weight, "loss term");
            const auto kind = parse_loss_kind(name);
            if (!kind) throw ConfigError("unknown loss '" + name + "'");
            cfg.losses.push_back({*kind, weight});
        }
    }
    if (root.contains("optimizer")) {
        const json& o = root["optimizer"];
        std::string kind = "adam";
        if (o.is_object()) read(o, "kind", kind, "optimizer");
        if (kind == "adam") {
            allow_keys(o, "optimizer", {"kind", "lr", "beta1", "beta2", "eps"});
            Adam adam;
            read(o, "lr", adam.lr, "optimizer");
            read(o, "beta1", adam.beta1, "optimizer");
            read(o, "beta2", adam.beta2, "optimizer");
            read(o, "eps", adam.eps, "optimizer");
            cfg.optimizer = adam;
        } else if (kind == "sgd") {
            allow_keys(o, "optimizer", {"kind", "lr", "momentum", "weight_decay"});
            SgdMomentum sgd;
            read(o, "lr", sgd.lr, "optimizer");
            read(o, "momentum", sgd.momentum, "optimizer");
            read(o, "weight_decay", sgd.weight_decay, "optimizer");
            cfg.optimizer = sgd;
        } else {
            throw ConfigError("unknown optimizer kind '" + kind + "'");
        }
    }
    read(root, "epochs", cfg.epochs, "config");
    if (root.contains("batch")) {
        const json& b = root["batch"];
        allow_keys(b, "batch", {"size", "per_class"});
        read(b, "size", cfg.batch.batch_size, "batch");
        read(b, "per_class", cfg.batch.per_class, "batch");
    }
    if (root.contains("lr_milestones")) {
        if (!root["lr_milestones"].is_array()) throw ConfigError("lr_milestones must be an array");
        for (const json& m : root["lr_milestones"]) {
            allow_keys(m, "lr milestone", {"epoch", "factor"});
            LrMilestone milestone{0, 1.0};
            read(m, "epoch", milestone.epoch, "lr milestone");
            read(m, "factor", milestone.factor, "lr milestone");
            cfg.lr_milestones.push_back(milestone);
        }
    }
    read(root, "seed", cfg.seed, "config");
    if (root.contains("teacher")) {
        std::string path;
        read(root, "teacher", path, "config");
        cfg.teacher_path = path;
    }
    read(root, "margin", cfg.margin, "config");
    if (root.contains("hkd")) {
        const json& h = root["hkd"];
        allow_keys(h, "hkd", {"temperature", "tau_squared"});
        read(h, "temperature", cfg.hkd_temperature, "hkd");
        read(h, "tau_squared", cfg.hkd_tau_squared, "hkd");
    }
    if (root.contains("sampler")) {
        const json& s = root["sampler"];
        allow_keys(s, "sampler", {"cutoff", "nonzero_loss_cutoff", "uniform"});
        read(s, "cutoff", cfg.sampler.cutoff, "sampler");
        read(s, "nonzero_loss_cutoff", cfg.sampler.nonzero_loss_cutoff, "sampler");
        read(s, "uniform", cfg.sampler.uniform, "sampler");
    }
    read(root, "recall_ks", cfg.recall_ks, "config");
    return cfg;
}

std::string dump_config(const DistillConfig& cfg) {
    nlohmann::ordered_json j;
    j["student"] = {{"widths", cfg.student.widths},
                    {"l2_normalize", cfg.student.l2_normalize},
                    {"classes", cfg.student.classifier_classes}};
    j["losses"] = nlohmann::ordered_json::array();
    for (const LossTerm& t : cfg.losses) j["losses"].push_back({{"loss", loss_name(t.kind)}, {"weight", t.weight}});
    if (const auto* adam = std::get_if<Adam>(&cfg.optimizer)) {
        j["optimizer"] = {{"kind", "adam"}, {"lr", adam->lr}, {"beta1", adam->beta1},
                          {"beta2", adam->beta2}, {"eps", adam->eps}};
    } else {
        const auto& sgd = std::get<SgdMomentum>(cfg.optimizer);
        j["optimizer"] = {{"kind", "sgd"}, {"lr", sgd.lr}, {"momentum", sgd.momentum},
                          {"weight_decay", sgd.weight_decay}};
    }
    j["epochs"] = cfg.epochs;
    j["batch"] = {{"size", cfg.batch.batch_size}, {"per_class", cfg.batch.per_class}};
    j["lr_milestones"] = nlohmann::ordered_json::array();
    for (const LrMilestone& m : cfg.lr_milestones) j["lr_milestones"].push_back({{"epoch", m.epoch}, {"factor", m.factor}});
    j["seed"] = cfg.seed;
    if (cfg.teacher_path) j["teacher"] = *cfg.teacher_path;
    j["margin"] = cfg.margin;
    j["hkd"] = {{"temperature", cfg.hkd_temperature}, {"tau_squared", cfg.hkd_tau_squared}};
    j["sampler"] = {{"cutoff", cfg.sampler.cutoff},
                    {"nonzero_loss_cutoff", cfg.sampler.nonzero_loss_cutoff},
                    {"uniform", cfg.sampler.uniform}};
    j["recall_ks"] = cfg.recall_ks;
    return j.dump(2);
}

DistillConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = detail::read_file(path);
    } catch (const FormatError&) {
        throw ConfigError("cannot read config file '" + path.string() + "'");
    }
    return parse_config(text);
}

} // namespace rkd
