// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "rkd/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rkd/error.hpp"

namespace rkd::ad {

namespace {

using IndexList = std::shared_ptr<const std::vector<std::size_t>>;

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                             b.shape_string());
    }
}

void require_valid(Var v) {
    if (!v.valid()) throw StateError("operation on an unbound Var");
}

} // namespace

const Matrix& Var::value() const {
    require_valid(*this);
    return tape_->value(id_);
}

const Matrix& Var::grad() const {
    require_valid(*this);
    return tape_->grad(id_);
}

Var Tape::leaf(Matrix value) {
    Node n;
    n.kind = OpKind::Leaf;
    n.requires_grad = true;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::constant(Matrix value) {
    Node n;
    n.kind = OpKind::Constant;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::push(Node node) {
    node.grad = Matrix(node.value.rows(), node.value.cols());
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

std::span<const std::size_t> Tape::inputs(std::size_t id) const {
    const Node& n = nodes_.at(id);
    return {n.inputs, n.num_inputs};
}

const Matrix& Tape::grad(std::size_t id) const { return nodes_.at(id).grad; }

Matrix& Tape::grad_buffer(std::size_t id) { return nodes_[id].grad; }

void Tape::zero_grad() {
    for (Node& n : nodes_) std::fill(n.grad.data().begin(), n.grad.data().end(), 0.0);
    backward_done_ = false;
}

void Tape::backward(Var root) {
    require_valid(root);
    if (root.tape() != this) throw StateError("backward: root belongs to a different tape");
    const Matrix& rv = nodes_.at(root.id()).value;
    if (rv.rows() != 1 || rv.cols() != 1) {
        throw DimensionError("backward: root must be 1x1, got " + rv.shape_string());
    }
    if (backward_done_) throw StateError("backward called twice without zero_grad()");
    backward_done_ = true;
    nodes_[root.id()].grad[0] += 1.0;
    for (std::size_t id = root.id() + 1; id-- > 0;) {
        const Node& n = nodes_[id];
        if (!n.requires_grad || n.kind == OpKind::Leaf || n.kind == OpKind::Constant) continue;
        backward_node(id);
    }
}

Var push_node(Tape& tape, OpKind kind, std::initializer_list<Var> inputs, Matrix value, double param,
              IndexList indices) {
    Tape::Node n;
    n.kind = kind;
    n.param = param;
    n.indices = std::move(indices);
    n.value = std::move(value);
    for (Var v : inputs) {
        require_valid(v);
        if (v.tape() != &tape) throw StateError("operands live on different tapes");
        n.inputs[n.num_inputs++] = v.id();
        n.requires_grad = n.requires_grad || tape.requires_grad(v.id());
    }
    return tape.push(std::move(n));
}

namespace {

Var make(OpKind kind, std::initializer_list<Var> inputs, Matrix value, double param = 0.0,
         IndexList indices = nullptr) {
    Tape& tape = *inputs.begin()->tape();
    return push_node(tape, kind, inputs, std::move(value), param, std::move(indices));
}

template <typename F>
Matrix map(const Matrix& a, F f) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
    return out;
}

template <typename F>
Matrix zip(const Matrix& a, const Matrix& b, F f) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
    return out;
}

Matrix softmax_forward(const Matrix& a, double temperature, bool log_space) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto in = a.row(r);
        auto o = out.row(r);
        double mx = -INFINITY;
        for (double v : in) mx = std::max(mx, v / temperature);
        double z = 0.0;
        for (std::size_t c = 0; c < in.size(); ++c) {
            o[c] = in[c] / temperature - mx;
            z += std::exp(o[c]);
        }
        const double log_z = std::log(z);
        for (double& v : o) v = log_space ? v - log_z : std::exp(v - log_z);
    }
    return out;
}

void check_temperature(double temperature) {
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw ParameterError("temperature must be positive, got " + std::to_string(temperature));
    }
}

} // namespace

void Tape::backward_node(std::size_t id) {
    const Node& n = nodes_[id];
    const Matrix& g = n.grad;
    const Matrix& y = n.value;
    auto in_value = [&](std::size_t k) -> const Matrix& { return nodes_[n.inputs[k]].value; };
    auto wants = [&](std::size_t k) { return nodes_[n.inputs[k]].requires_grad; };
    auto acc = [&](std::size_t k) -> Matrix& { return grad_buffer(n.inputs[k]); };

    switch (n.kind) {
    case OpKind::Leaf:
    case OpKind::Constant:
        break;
    case OpKind::MatMul: {
        const Matrix& a = in_value(0);
        const Matrix& b = in_value(1);
        if (wants(0)) {
            Matrix ga = rkd::matmul(g, b.transposed());
            Matrix& dst = acc(0);
            for (std::size_t i = 0; i < ga.size(); ++i) dst[i] += ga[i];
        }
        if (wants(1)) {
            Matrix gb = rkd::matmul(a.transposed(), g);
            Matrix& dst = acc(1);
            for (std::size_t i = 0; i < gb.size(); ++i) dst[i] += gb[i];
        }
        break;
    }
    case OpKind::Transpose: {
        Matrix& dst = acc(0);
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t c = 0; c < g.cols(); ++c) dst(c, r) += g(r, c);
        break;
    }
    case OpKind::Add:
        for (std::size_t k = 0; k < 2; ++k) {
            if (!wants(k)) continue;
            Matrix& dst = acc(k);
            for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
        }
        break;
    case OpKind::Sub:
        if (wants(0)) {
            Matrix& dst = acc(0);
            for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
        }
        if (wants(1)) {
            Matrix& dst = acc(1);
            for (std::size_t i = 0; i < g.size(); ++i) dst[i] -= g[i];
        }
        break;
    case OpKind::Mul: {
        const Matrix& a = in_value(0);
        const Matrix& b = in_value(1);
        if (wants(0)) {
            Matrix& dst = acc(0);
            for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i] * b[i];
        }
        if (wants(1)) {
            Matrix& dst = acc(1);
            for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i] * a[i];
        }
        break;
    }
    case OpKind::Square: {
        const Matrix& a = in_value(0);
        Matrix& dst = acc(0);
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += 2.0 * a[i] * g[i];
        break;
    }
    case OpKind::Sqrt: {
        Matrix& dst = acc(0);
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i] / (2.0 * y[i]);
        break;
    }
    case OpKind::Exp: {
        Matrix& dst = acc(0);
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i] * y[i];
        break;
    }
    case OpKind::Log: {
        const Matrix& a = in_value(0);
        Matrix& dst = acc(0);
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i] / std::max(a[i], kEps);
        break;
    }
    case OpKind::MaxScalar: {
        const Matrix& a = in_value(0);
        Matrix& dst = acc(0);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (a[i] > n.param) dst[i] += g[i];
        break;
    }
    case OpKind::Scale: {
        Matrix& dst = acc(0);
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += n.param * g[i];
        break;
    }
    case OpKind::AddScalar: {
        Matrix& dst = acc(0);
        for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
        break;
    }
    case OpKind::AddRow: {
        if (wants(0)) {
            Matrix& dst = acc(0);
            for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
        }
        if (wants(1)) {
            Matrix& dst = acc(1);
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t c = 0; c < g.cols(); ++c) dst[c] += g(r, c);
        }
        break;
    }
    case OpKind::DivByScalar: {
        const Matrix& a = in_value(0);
        const double s = in_value(1)[0];
        if (wants(0)) {
            Matrix& dst = acc(0);
            for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i] / s;
        }
        if (wants(1)) {
            double total = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) total += g[i] * a[i];
            acc(1)[0] -= total / (s * s);
        }
        break;
    }
    case OpKind::Huber: {
        const Matrix& a = in_value(0);
        const Matrix& b = in_value(1);
        for (std::size_t k = 0; k < 2; ++k) {
            if (!wants(k)) continue;
            const double sign = k == 0 ? 1.0 : -1.0;
            Matrix& dst = acc(k);
            for (std::size_t i = 0; i < g.size(); ++i) {
                dst[i] += sign * g[i] * std::clamp(a[i] - b[i], -1.0, 1.0);
            }
        }
        break;
    }
    case OpKind::Sum:
    case OpKind::Mean: {
        Matrix& dst = acc(0);
        const double scaled =
            n.kind == OpKind::Sum ? g[0] : g[0] / static_cast<double>(dst.size());
        for (double& v : dst.data()) v += scaled;
        break;
    }
    case OpKind::RowSum: {
        Matrix& dst = acc(0);
        for (std::size_t r = 0; r < dst.rows(); ++r)
            for (double& v : dst.row(r)) v += g[r];
        break;
    }
    case OpKind::RowNorm: {
        const Matrix& a = in_value(0);
        Matrix& dst = acc(0);
        for (std::size_t r = 0; r < a.rows(); ++r) {
            const double k = g[r] / std::max(y[r], kEps);
            auto src = a.row(r);
            auto out = dst.row(r);
            for (std::size_t c = 0; c < src.size(); ++c) out[c] += k * src[c];
        }
        break;
    }
    case OpKind::RowL2Normalize: {
        const Matrix& a = in_value(0);
        Matrix& dst = acc(0);
        for (std::size_t r = 0; r < a.rows(); ++r) {
            auto ar = a.row(r);
            auto yr = y.row(r);
            auto gr = g.row(r);
            auto out = dst.row(r);
            double norm_sq = 0.0;
            for (double v : ar) norm_sq += v * v;
            const double norm = std::sqrt(norm_sq);
            if (norm > kEps) {
                double dot = 0.0;
                for (std::size_t c = 0; c < gr.size(); ++c) dot += yr[c] * gr[c];
                for (std::size_t c = 0; c < gr.size(); ++c) out[c] += (gr[c] - yr[c] * dot) / norm;
            } else {
                for (std::size_t c = 0; c < gr.size(); ++c) out[c] += gr[c] / kEps;
            }
        }
        break;
    }
    case OpKind::SoftmaxRows: {
        Matrix& dst = acc(0);
        for (std::size_t r = 0; r < y.rows(); ++r) {
            auto yr = y.row(r);
            auto gr = g.row(r);
            auto out = dst.row(r);
            double dot = 0.0;
            for (std::size_t c = 0; c < yr.size(); ++c) dot += yr[c] * gr[c];
            for (std::size_t c = 0; c < yr.size(); ++c) out[c] += yr[c] * (gr[c] - dot) / n.param;
        }
        break;
    }
    case OpKind::LogSoftmaxRows: {
        Matrix& dst = acc(0);
        for (std::size_t r = 0; r < y.rows(); ++r) {
            auto yr = y.row(r);
            auto gr = g.row(r);
            auto out = dst.row(r);
            double gsum = 0.0;
            for (double v : gr) gsum += v;
            for (std::size_t c = 0; c < yr.size(); ++c)
                out[c] += (gr[c] - std::exp(yr[c]) * gsum) / n.param;
        }
        break;
    }
    case OpKind::GatherRows: {
        Matrix& dst = acc(0);
        const auto& idx = *n.indices;
        for (std::size_t r = 0; r < idx.size(); ++r) {
            auto gr = g.row(r);
            auto out = dst.row(idx[r]);
            for (std::size_t c = 0; c < gr.size(); ++c) out[c] += gr[c];
        }
        break;
    }
    case OpKind::PickColumns: {
        Matrix& dst = acc(0);
        const auto& cols = *n.indices;
        for (std::size_t r = 0; r < cols.size(); ++r) dst(r, cols[r]) += g[r];
        break;
    }
    }
}

Var matmul(Var a, Var b) {
    require_valid(a);
    require_valid(b);
    return make(OpKind::MatMul, {a, b}, rkd::matmul(a.value(), b.value()));
}

Var transpose(Var a) { return make(OpKind::Transpose, {a}, a.value().transposed()); }

Var add(Var a, Var b) {
    require_same_shape("add", a.value(), b.value());
    return make(OpKind::Add, {a, b}, zip(a.value(), b.value(), [](double x, double y) { return x + y; }));
}

Var sub(Var a, Var b) {
    require_same_shape("sub", a.value(), b.value());
    return make(OpKind::Sub, {a, b}, zip(a.value(), b.value(), [](double x, double y) { return x - y; }));
}

Var mul(Var a, Var b) {
    require_same_shape("mul", a.value(), b.value());
    return make(OpKind::Mul, {a, b}, zip(a.value(), b.value(), [](double x, double y) { return x * y; }));
}

Var square(Var a) {
    return make(OpKind::Square, {a}, map(a.value(), [](double x) { return x * x; }));
}

Var sqrt(Var a) {
    return make(OpKind::Sqrt, {a}, map(a.value(), [](double x) { return std::sqrt(std::max(x, kEps)); }));
}

Var exp(Var a) {
    return make(OpKind::Exp, {a}, map(a.value(), [](double x) { return std::exp(x); }));
}

Var log(Var a) {
    return make(OpKind::Log, {a}, map(a.value(), [](double x) { return std::log(std::max(x, kEps)); }));
}

Var max_scalar(Var a, double c) {
    return make(OpKind::MaxScalar, {a}, map(a.value(), [c](double x) { return std::max(x, c); }), c);
}

Var scale(Var a, double factor) {
    return make(OpKind::Scale, {a}, map(a.value(), [factor](double x) { return factor * x; }), factor);
}

Var add_scalar(Var a, double c) {
    return make(OpKind::AddScalar, {a}, map(a.value(), [c](double x) { return x + c; }), c);
}

Var add_row(Var a, Var row) {
    const Matrix& av = a.value();
    const Matrix& rv = row.value();
    if (rv.rows() != 1 || rv.cols() != av.cols()) {
        throw DimensionError("add_row: row " + rv.shape_string() + " does not broadcast over " +
                             av.shape_string());
    }
    Matrix out = av;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += rv[c];
    return make(OpKind::AddRow, {a, row}, std::move(out));
}

Var div_by_scalar(Var a, Var s) {
    if (s.rows() != 1 || s.cols() != 1) {
        throw DimensionError("div_by_scalar: divisor must be 1x1, got " + s.value().shape_string());
    }
    const double d = s.value()[0];
    return make(OpKind::DivByScalar, {a, s}, map(a.value(), [d](double x) { return x / d; }));
}

Var huber(Var a, Var b) {
    require_same_shape("huber", a.value(), b.value());
    return make(OpKind::Huber, {a, b}, zip(a.value(), b.value(), [](double x, double y) {
                    const double r = std::abs(x - y);
                    return r <= 1.0 ? 0.5 * r * r : r - 0.5;
                }));
}

Var sum(Var a) {
    if (a.value().empty()) throw DomainError("sum of an empty matrix");
    double total = 0.0;
    for (double v : a.value().data()) total += v;
    return make(OpKind::Sum, {a}, Matrix::scalar(total));
}

Var mean(Var a) {
    if (a.value().empty()) throw DomainError("mean of an empty matrix");
    double total = 0.0;
    for (double v : a.value().data()) total += v;
    return make(OpKind::Mean, {a}, Matrix::scalar(total / static_cast<double>(a.value().size())));
}

Var row_sum(Var a) {
    const Matrix& av = a.value();
    Matrix out(av.rows(), 1);
    for (std::size_t r = 0; r < av.rows(); ++r) {
        double s = 0.0;
        for (double v : av.row(r)) s += v;
        out[r] = s;
    }
    return make(OpKind::RowSum, {a}, std::move(out));
}

Var row_norm(Var a) {
    const Matrix& av = a.value();
    Matrix out(av.rows(), 1);
    for (std::size_t r = 0; r < av.rows(); ++r) {
        double s = 0.0;
        for (double v : av.row(r)) s += v * v;
        out[r] = std::sqrt(s);
    }
    return make(OpKind::RowNorm, {a}, std::move(out));
}

Var row_l2_normalize(Var a) {
    const Matrix& av = a.value();
    Matrix out(av.rows(), av.cols());
    for (std::size_t r = 0; r < av.rows(); ++r) {
        double s = 0.0;
        for (double v : av.row(r)) s += v * v;
        const double den = std::max(std::sqrt(s), kEps);
        auto src = av.row(r);
        auto dst = out.row(r);
        for (std::size_t c = 0; c < src.size(); ++c) dst[c] = src[c] / den;
    }
    return make(OpKind::RowL2Normalize, {a}, std::move(out));
}

Var softmax_rows(Var a, double temperature) {
    check_temperature(temperature);
    return make(OpKind::SoftmaxRows, {a}, softmax_forward(a.value(), temperature, false), temperature);
}

Var log_softmax_rows(Var a, double temperature) {
    check_temperature(temperature);
    return make(OpKind::LogSoftmaxRows, {a}, softmax_forward(a.value(), temperature, true), temperature);
}

Var gather_rows(Var a, IndexList indices) {
    Matrix out = rkd::gather_rows(a.value(), *indices);
    return make(OpKind::GatherRows, {a}, std::move(out), 0.0, std::move(indices));
}

Var gather_rows(Var a, std::vector<std::size_t> indices) {
    return gather_rows(a, std::make_shared<const std::vector<std::size_t>>(std::move(indices)));
}

Var pick_columns(Var a, std::vector<std::size_t> columns) {
    const Matrix& av = a.value();
    if (columns.size() != av.rows()) {
        throw DimensionError("pick_columns: " + std::to_string(columns.size()) + " indices for " +
                             av.shape_string());
    }
    Matrix out(av.rows(), 1);
    for (std::size_t r = 0; r < columns.size(); ++r) {
        if (columns[r] >= av.cols()) {
            throw DomainError("pick_columns: column " + std::to_string(columns[r]) +
                              " out of range for " + av.shape_string());
        }
        out[r] = av(r, columns[r]);
    }
    return make(OpKind::PickColumns, {a}, std::move(out), 0.0,
                std::make_shared<const std::vector<std::size_t>>(std::move(columns)));
}

} // namespace rkd::ad
