// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// RKEB: "RKEB", u32 version (1), u32 N, u32 d, N*d float32 row-major, N u32
// labels. All integers and floats little-endian. Values are stored at 32-bit
// precision and widened to double on load.

#include <filesystem>

#include "rkd/relational.hpp"

namespace rkd {

void write_embeddings(const std::filesystem::path& path, const EmbeddingBatch& batch);

/// FormatError (with byte offset or expected/actual size) on malformed input.
EmbeddingBatch read_embeddings(const std::filesystem::path& path);

/// Rounds every value through float32, i.e. what a write/read cycle yields.
Matrix quantize_to_storage(const Matrix& m);

} // namespace rkd
