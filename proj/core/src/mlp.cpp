// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "rkd/mlp.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "binary_io.hpp"
#include "rkd/error.hpp"

namespace rkd {

namespace {

constexpr std::string_view kMagic = "RKDP";
constexpr std::uint32_t kVersion = 1;

} // namespace

void MlpSpec::validate() const {
    if (widths.size() < 2) throw ConfigError("network needs at least two widths, got " + to_string());
    for (std::size_t w : widths)
        if (w == 0) throw ConfigError("network widths must be positive, got " + to_string());
    if (activation != Activation::kRelu) throw ConfigError("unsupported activation");
}

std::string MlpSpec::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < widths.size(); ++i) os << (i ? "-" : "") << widths[i];
    if (l2_normalize) os << " +l2";
    if (classifier_classes) os << " +classifier(" << classifier_classes << ")";
    return os.str();
}

std::vector<std::pair<std::size_t, std::size_t>> parameter_shapes(const MlpSpec& spec) {
    spec.validate();
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    for (std::size_t l = 0; l < spec.num_layers(); ++l) {
        shapes.emplace_back(spec.widths[l + 1], spec.widths[l]);
        shapes.emplace_back(1, spec.widths[l + 1]);
    }
    if (spec.has_classifier()) {
        shapes.emplace_back(spec.classifier_classes, spec.embedding_dim());
        shapes.emplace_back(1, spec.classifier_classes);
    }
    return shapes;
}

void check_parameters(const MlpSpec& spec, const Parameters& params) {
    const auto shapes = parameter_shapes(spec);
    if (shapes.size() != params.tensors.size()) {
        throw ConfigError("spec " + spec.to_string() + " needs " + std::to_string(shapes.size()) +
                          " tensors, parameters have " + std::to_string(params.tensors.size()));
    }
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const Matrix& t = params.tensors[i];
        if (t.rows() != shapes[i].first || t.cols() != shapes[i].second) {
            throw ConfigError("tensor " + std::to_string(i) + " has shape " + t.shape_string() +
                              ", spec " + spec.to_string() + " needs " +
                              std::to_string(shapes[i].first) + "x" + std::to_string(shapes[i].second));
        }
    }
}

Parameters init_params(const MlpSpec& spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Parameters params;
    for (const auto& [rows, cols] : parameter_shapes(spec)) {
        Matrix t(rows, cols);
        const bool is_weight = params.tensors.size() % 2 == 0;
        if (is_weight) {
            std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(cols)));
            for (double& v : t.data()) v = dist(rng);
        }
        params.tensors.push_back(std::move(t));
    }
    return params;
}

MlpVars bind(ad::Tape& tape, const Parameters& params, bool trainable) {
    MlpVars vars;
    vars.tensors.reserve(params.tensors.size());
    for (const Matrix& t : params.tensors)
        vars.tensors.push_back(trainable ? tape.leaf(t) : tape.constant(t));
    return vars;
}

std::vector<Matrix> gradients(const MlpVars& vars) {
    std::vector<Matrix> grads;
    grads.reserve(vars.tensors.size());
    for (ad::Var v : vars.tensors) grads.push_back(v.grad());
    return grads;
}

MlpOutput forward(const MlpVars& vars, const MlpSpec& spec, ad::Var inputs) {
    const auto shapes = parameter_shapes(spec);
    if (vars.tensors.size() != shapes.size()) {
        throw DimensionError("bound parameters do not match spec " + spec.to_string());
    }
    if (inputs.cols() != spec.input_dim()) {
        throw DimensionError("network " + spec.to_string() + " expects " +
                             std::to_string(spec.input_dim()) + " input columns, got " +
                             inputs.value().shape_string());
    }
    ad::Var h = inputs;
    for (std::size_t l = 0; l < spec.num_layers(); ++l) {
        h = ad::add_row(ad::matmul(h, ad::transpose(vars.tensors[2 * l])), vars.tensors[2 * l + 1]);
        if (l + 1 < spec.num_layers()) h = ad::max_scalar(h, 0.0);
    }
    if (spec.l2_normalize) h = ad::row_l2_normalize(h);
    MlpOutput out{h, std::nullopt};
    if (spec.has_classifier()) {
        const std::size_t c = 2 * spec.num_layers();
        out.logits = ad::add_row(ad::matmul(h, ad::transpose(vars.tensors[c])), vars.tensors[c + 1]);
    }
    return out;
}

MlpEvaluation forward(const Model& model, const Matrix& inputs) {
    ad::Tape tape;
    const MlpVars vars = bind(tape, model.params, false);
    const MlpOutput out = forward(vars, model.spec, tape.constant(inputs));
    MlpEvaluation eval{out.embedding.value(), std::nullopt};
    if (out.logits) eval.logits = out.logits->value();
    return eval;
}

void save_params(const std::filesystem::path& path, const Model& model) {
    check_parameters(model.spec, model.params);
    detail::ByteWriter w;
    w.bytes(kMagic);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(model.spec.widths.size()));
    for (std::size_t width : model.spec.widths) w.u32(static_cast<std::uint32_t>(width));
    w.u8(static_cast<std::uint8_t>(model.spec.activation));
    w.u8(model.spec.l2_normalize ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(model.spec.classifier_classes));
    for (const Matrix& t : model.params.tensors)
        for (double v : t.data()) w.f64(v);
    detail::write_file(path, w.buffer());
}

Model load_params(const std::filesystem::path& path) {
    detail::ByteReader r(detail::read_file(path));
    if (r.bytes(4, "magic") != kMagic) throw FormatError("bad magic in '" + path.string() + "': not an RKDP file");
    const std::uint32_t version = r.u32("version");
    if (version != kVersion) throw FormatError("unsupported RKDP version " + std::to_string(version));

    Model model;
    const std::uint32_t num_widths = r.u32("num_widths");
    if (num_widths < 2 || num_widths > r.remaining() / 4) r.fail("implausible num_widths " + std::to_string(num_widths));
    for (std::uint32_t i = 0; i < num_widths; ++i) {
        const std::uint32_t w = r.u32("widths");
        if (w == 0) r.fail("zero layer width");
        model.spec.widths.push_back(w);
    }
    const std::uint8_t activation = r.u8("activation");
    if (activation != static_cast<std::uint8_t>(Activation::kRelu)) r.fail("unknown activation " + std::to_string(activation));
    const std::uint8_t l2 = r.u8("l2_normalize");
    if (l2 > 1) r.fail("l2_normalize flag must be 0 or 1");
    model.spec.l2_normalize = l2 == 1;
    model.spec.classifier_classes = r.u32("classifier_classes");

    std::size_t expected = 0;
    const auto shapes = parameter_shapes(model.spec);
    for (const auto& [rows, cols] : shapes) expected += rows * cols;
    if (r.remaining() != expected * 8) {
        throw FormatError("parameter payload for spec " + model.spec.to_string() + " should be " +
                          std::to_string(expected * 8) + " bytes, file has " +
                          std::to_string(r.remaining()) + " after header offset " +
                          std::to_string(r.offset()));
    }
    for (const auto& [rows, cols] : shapes) {
        Matrix t(rows, cols);
        for (double& v : t.data()) v = r.f64("tensor data");
        model.params.tensors.push_back(std::move(t));
    }
    return model;
}

Parameters load_params(const std::filesystem::path& path, const MlpSpec& expected) {
    Model model = load_params(path);
    if (!(model.spec == expected)) {
        throw FormatError("parameter file '" + path.string() + "' holds spec " + model.spec.to_string() +
                          ", expected " + expected.to_string());
    }
    return std::move(model.params);
}

} // namespace rkd
