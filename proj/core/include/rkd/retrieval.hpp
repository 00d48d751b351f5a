// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rkd/relational.hpp"

namespace rkd {

/// Recall@K for each K in `ks`. Every row queries all other rows ranked by
/// Euclidean distance, ties broken by lower index; a query scores 1 when any
/// of its K nearest neighbours shares its label. Throws DomainError for N < 2,
/// K == 0 or K >= N.
std::vector<double> recall_at_k(const Matrix& embeddings, std::span<const Label> labels,
                                std::span<const std::size_t> ks);

/// Fraction of rows whose arg-max logit equals the label (first maximum wins).
double accuracy(const Matrix& logits, std::span<const Label> labels);

} // namespace rkd
