// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rkd/autodiff.hpp"

namespace rkd {

enum class Activation : std::uint8_t { kRelu = 0 };

/// Fully-connected embedding network. widths[0] is the input dimension and
/// widths.back() the embedding dimension. Hidden layers use `activation`; the
/// last affine layer has none and is optionally followed by row L2
/// normalisation. A classifier head, when present, maps the embedding to logits.
struct MlpSpec {
    std::vector<std::size_t> widths;
    Activation activation = Activation::kRelu;
    bool l2_normalize = false;
    std::size_t classifier_classes = 0;

    std::size_t input_dim() const { return widths.front(); }
    std::size_t embedding_dim() const { return widths.back(); }
    std::size_t num_layers() const { return widths.size() - 1; }
    bool has_classifier() const noexcept { return classifier_classes > 0; }

    /// Throws ConfigError for fewer than two widths or a zero width.
    void validate() const;
    std::string to_string() const;

    friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// Learnable tensors laid out as [W0, b0, W1, b1, ..., (Wc, bc)]. Weights are
/// out×in, biases 1×out.
struct Parameters {
    std::vector<Matrix> tensors;

    const Matrix& weight(std::size_t layer) const { return tensors.at(2 * layer); }
    const Matrix& bias(std::size_t layer) const { return tensors.at(2 * layer + 1); }
    Matrix& weight(std::size_t layer) { return tensors.at(2 * layer); }
    Matrix& bias(std::size_t layer) { return tensors.at(2 * layer + 1); }

    friend bool operator==(const Parameters&, const Parameters&) = default;
};

/// A spec together with matching parameters.
struct Model {
    MlpSpec spec;
    Parameters params;
};

/// Shapes every tensor must have for `spec`, in Parameters order.
std::vector<std::pair<std::size_t, std::size_t>> parameter_shapes(const MlpSpec& spec);

/// Throws ConfigError when `params` does not match `spec`.
void check_parameters(const MlpSpec& spec, const Parameters& params);

/// He initialisation: weights ~ N(0, 2 / fan_in) from a seeded mt19937_64, biases zero.
Parameters init_params(const MlpSpec& spec, std::uint64_t seed);

struct MlpVars {
    std::vector<ad::Var> tensors;
};

/// Binds parameters to a tape as leaves (student) or constants (teacher).
MlpVars bind(ad::Tape& tape, const Parameters& params, bool trainable);

/// Reads the accumulated gradients of bound parameters.
std::vector<Matrix> gradients(const MlpVars& vars);

struct MlpOutput {
    ad::Var embedding;
    std::optional<ad::Var> logits;
};

MlpOutput forward(const MlpVars& vars, const MlpSpec& spec, ad::Var inputs);

struct MlpEvaluation {
    Matrix embedding;
    std::optional<Matrix> logits;
};

/// Forward pass outside any training graph; bit-identical to the tape path.
MlpEvaluation forward(const Model& model, const Matrix& inputs);

/// Writes the RKDP parameter file.
void save_params(const std::filesystem::path& path, const Model& model);

/// Reads an RKDP file; FormatError on any corruption.
Model load_params(const std::filesystem::path& path);

/// Reads an RKDP file and requires its spec to equal `expected`.
Parameters load_params(const std::filesystem::path& path, const MlpSpec& expected);

} // namespace rkd
