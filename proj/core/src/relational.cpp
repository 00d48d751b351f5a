// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "rkd/relational.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "rkd/error.hpp"

namespace rkd {

namespace {

using IndexList = std::shared_ptr<const std::vector<std::size_t>>;

void require_batch(const char* what, std::size_t n, std::size_t minimum) {
    if (n < minimum) {
        throw DomainError(std::string(what) + " needs at least " + std::to_string(minimum) +
                          " examples, got " + std::to_string(n));
    }
}

void require_same_count(const Matrix& teacher, ad::Var student) {
    if (teacher.rows() != student.rows()) {
        throw DimensionError("teacher has " + std::to_string(teacher.rows()) +
                             " rows, student has " + std::to_string(student.rows()));
    }
}

} // namespace

std::vector<IndexPair> enumerate_pairs(std::size_t n) {
    require_batch("pair enumeration", n, 2);
    std::vector<IndexPair> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.push_back({i, j});
    return pairs;
}

std::vector<AngleTriplet> enumerate_angle_triplets(std::size_t n) {
    require_batch("angle enumeration", n, 3);
    std::vector<AngleTriplet> triplets;
    triplets.reserve(n * (n - 1) * (n - 2) / 2);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            if (i == j) continue;
            for (std::size_t k = i + 1; k < n; ++k) {
                if (k == j) continue;
                triplets.push_back({i, j, k});
            }
        }
    return triplets;
}

ad::Var distance_potentials(ad::Var embeddings, std::span<const IndexPair> pairs,
                            MeanGradient mean_gradient) {
    auto first = std::make_shared<std::vector<std::size_t>>();
    auto second = std::make_shared<std::vector<std::size_t>>();
    first->reserve(pairs.size());
    second->reserve(pairs.size());
    for (const IndexPair& p : pairs) {
        first->push_back(p.i);
        second->push_back(p.j);
    }
    ad::Var diff = ad::sub(ad::gather_rows(embeddings, IndexList(first)),
                           ad::gather_rows(embeddings, IndexList(second)));
    ad::Var dist = ad::row_norm(diff);
    ad::Var mu = ad::mean(dist);
    if (mean_gradient == MeanGradient::kDetach) mu = embeddings.tape()->constant(mu.value());
    return ad::div_by_scalar(dist, ad::max_scalar(mu, ad::kEps));
}

Matrix distance_potentials(const Matrix& embeddings, std::span<const IndexPair> pairs) {
    return ad::evaluate(embeddings, [&](ad::Var e) { return distance_potentials(e, pairs); });
}

ad::Var angle_potentials(ad::Var embeddings, std::span<const AngleTriplet> triplets) {
    const std::size_t n = embeddings.rows();
    // Unit difference vectors for every ordered pair (a, b), row a * n + b.
    auto from = std::make_shared<std::vector<std::size_t>>();
    auto to = std::make_shared<std::vector<std::size_t>>();
    from->reserve(n * n);
    to->reserve(n * n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            from->push_back(a);
            to->push_back(b);
        }
    ad::Var unit = ad::row_l2_normalize(ad::sub(ad::gather_rows(embeddings, IndexList(from)),
                                                ad::gather_rows(embeddings, IndexList(to))));

    auto left = std::make_shared<std::vector<std::size_t>>();
    auto right = std::make_shared<std::vector<std::size_t>>();
    left->reserve(triplets.size());
    right->reserve(triplets.size());
    for (const AngleTriplet& t : triplets) {
        if (t.i >= n || t.j >= n || t.k >= n) {
            throw DomainError("angle triplet index out of range for " + std::to_string(n) +
                              " examples");
        }
        left->push_back(t.i * n + t.j);
        right->push_back(t.k * n + t.j);
    }
    return ad::row_sum(ad::mul(ad::gather_rows(unit, IndexList(left)),
                               ad::gather_rows(unit, IndexList(right))));
}

Matrix angle_potentials(const Matrix& embeddings, std::span<const AngleTriplet> triplets) {
    return ad::evaluate(embeddings, [&](ad::Var e) { return angle_potentials(e, triplets); });
}

double huber(double x, double y) noexcept {
    const double r = std::abs(x - y);
    return r <= 1.0 ? 0.5 * r * r : r - 0.5;
}

ad::Var rkd_distance_loss(const Matrix& teacher, ad::Var student, MeanGradient mean_gradient) {
    require_same_count(teacher, student);
    require_batch("distance loss", student.rows(), 2);
    const auto pairs = enumerate_pairs(student.rows());
    ad::Tape& tape = *student.tape();
    ad::Var target = tape.constant(distance_potentials(teacher, pairs));
    return ad::mean(ad::huber(distance_potentials(student, pairs, mean_gradient), target));
}

ad::Var rkd_angle_loss(const Matrix& teacher, ad::Var student) {
    require_same_count(teacher, student);
    require_batch("angle loss", student.rows(), 3);
    const auto triplets = enumerate_angle_triplets(student.rows());
    ad::Tape& tape = *student.tape();
    ad::Var target = tape.constant(angle_potentials(teacher, triplets));
    return ad::mean(ad::huber(angle_potentials(student, triplets), target));
}

ad::Var rkd_da_loss(const Matrix& teacher, ad::Var student, double lambda_distance,
                    double lambda_angle) {
    if (lambda_distance < 0.0 || lambda_angle < 0.0) {
        throw ConfigError("relational loss weights must be non-negative");
    }
    if (lambda_distance == 0.0 && lambda_angle == 0.0) {
        throw ConfigError("relational loss weights are both zero");
    }
    if (lambda_angle == 0.0) return ad::scale(rkd_distance_loss(teacher, student), lambda_distance);
    if (lambda_distance == 0.0) return ad::scale(rkd_angle_loss(teacher, student), lambda_angle);
    return ad::add(ad::scale(rkd_distance_loss(teacher, student), lambda_distance),
                   ad::scale(rkd_angle_loss(teacher, student), lambda_angle));
}

double rkd_distance_value(const Matrix& teacher, const Matrix& student) {
    ad::Tape tape;
    return rkd_distance_loss(teacher, tape.constant(student)).value().item();
}

double rkd_angle_value(const Matrix& teacher, const Matrix& student) {
    ad::Tape tape;
    return rkd_angle_loss(teacher, tape.constant(student)).value().item();
}

} // namespace rkd
