// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Define-by-run reverse-mode differentiation over dense matrices.
//
// A Tape records every operation in creation order, which is also a valid
// topological order. Var is a cheap handle (tape pointer + node id). Build a
// fresh tape per step; one tape must only be used from one thread.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "rkd/matrix.hpp"

namespace rkd::ad {

/// Lower clamp applied inside sqrt/log and to norms used as divisors.
inline constexpr double kEps = 1e-12;

enum class OpKind {
    Leaf,
    Constant,
    MatMul,
    Transpose,
    Add,
    Sub,
    Mul,
    Square,
    Sqrt,
    Exp,
    Log,
    MaxScalar,
    Scale,
    AddScalar,
    AddRow,
    DivByScalar,
    Sum,
    Mean,
    RowSum,
    RowNorm,
    RowL2Normalize,
    SoftmaxRows,
    LogSoftmaxRows,
    GatherRows,
    PickColumns,
    Huber,
};

class Tape;

/// Handle to a node on a tape.
class Var {
public:
    Var() = default;

    const Matrix& value() const;
    /// Accumulated gradient; zeros until backward() has run.
    const Matrix& grad() const;
    std::size_t id() const noexcept { return id_; }
    Tape* tape() const noexcept { return tape_; }
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    bool valid() const noexcept { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Differentiable input (parameter or input that needs a gradient).
    Var leaf(Matrix value);
    /// Input that never receives a gradient.
    Var constant(Matrix value);

    /// Reverse sweep from a 1×1 root. Throws StateError if called again
    /// before zero_grad().
    void backward(Var root);
    /// Clears all gradient accumulators and re-arms backward().
    void zero_grad();

    std::size_t size() const noexcept { return nodes_.size(); }
    OpKind kind(std::size_t id) const { return nodes_.at(id).kind; }
    std::span<const std::size_t> inputs(std::size_t id) const;
    bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
    const Matrix& value(std::size_t id) const { return nodes_.at(id).value; }
    const Matrix& grad(std::size_t id) const;

private:
    struct Node {
        OpKind kind = OpKind::Leaf;
        std::size_t inputs[2] = {0, 0};
        std::size_t num_inputs = 0;
        bool requires_grad = false;
        double param = 0.0;
        std::shared_ptr<const std::vector<std::size_t>> indices;
        Matrix value;
        Matrix grad;
    };

    friend Var push_node(Tape& tape, OpKind kind, std::initializer_list<Var> inputs, Matrix value,
                         double param, std::shared_ptr<const std::vector<std::size_t>> indices);

    Var push(Node node);
    void backward_node(std::size_t id);
    Matrix& grad_buffer(std::size_t id);

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

// Matrix algebra.
Var matmul(Var a, Var b);
Var transpose(Var a);

// Elementwise. Binary operands must have equal shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var square(Var a);
/// sqrt(max(x, kEps)); backward is g / (2 * guarded value).
Var sqrt(Var a);
Var exp(Var a);
/// log(max(x, kEps)); backward is g / max(x, kEps).
Var log(Var a);
/// max(x, c); subgradient 0 where x <= c.
Var max_scalar(Var a, double c);
Var scale(Var a, double factor);
Var add_scalar(Var a, double c);
/// Adds a 1×cols row to every row of `a` (bias broadcast).
Var add_row(Var a, Var row);
/// a / s for a 1×1 node s.
Var div_by_scalar(Var a, Var s);
/// Huber penalty with unit threshold applied elementwise to (a - b).
Var huber(Var a, Var b);

// Reductions.
Var sum(Var a);
Var mean(Var a);
/// n×c -> n×1.
Var row_sum(Var a);
/// Euclidean norm of each row (n×1). Gradient row / max(norm, kEps), so zero rows get zero gradient.
Var row_norm(Var a);

// Row-wise transforms.
/// Each row divided by max(norm, kEps).
Var row_l2_normalize(Var a);
/// Row-wise softmax of a / temperature, max-subtracted.
Var softmax_rows(Var a, double temperature);
/// Row-wise log-softmax of a / temperature, max-subtracted.
Var log_softmax_rows(Var a, double temperature);

// Indexing.
Var gather_rows(Var a, std::shared_ptr<const std::vector<std::size_t>> indices);
Var gather_rows(Var a, std::vector<std::size_t> indices);
/// Picks a(i, columns[i]) for each row; n×1.
Var pick_columns(Var a, std::vector<std::size_t> columns);

/// Evaluates a graph builder on a throw-away tape with constant inputs and
/// returns the forward value. Keeps reference evaluations bit-identical to the
/// differentiable path.
template <typename Fn>
Matrix evaluate(const Matrix& input, Fn&& fn) {
    Tape tape;
    Var x = tape.constant(input);
    return fn(x).value();
}

} // namespace rkd::ad
