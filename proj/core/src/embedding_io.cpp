// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "rkd/embedding_io.hpp"

#include <limits>
#include <string>

#include "binary_io.hpp"
#include "rkd/error.hpp"

namespace rkd {

namespace {

constexpr std::string_view kMagic = "RKEB";
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 16;

} // namespace

void write_embeddings(const std::filesystem::path& path, const EmbeddingBatch& batch) {
    const Matrix& e = batch.embeddings;
    if (batch.labels.size() != e.rows()) {
        throw DimensionError("write_embeddings: " + std::to_string(batch.labels.size()) +
                             " labels for " + std::to_string(e.rows()) + " rows");
    }
    constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
    if (e.rows() > kMax || e.cols() > kMax) throw DimensionError("embedding batch too large for RKEB");
    detail::ByteWriter w;
    w.bytes(kMagic);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(e.rows()));
    w.u32(static_cast<std::uint32_t>(e.cols()));
    for (double v : e.data()) w.f32(static_cast<float>(v));
    for (Label l : batch.labels) w.u32(l);
    detail::write_file(path, w.buffer());
}

EmbeddingBatch read_embeddings(const std::filesystem::path& path) {
    detail::ByteReader r(detail::read_file(path));
    if (r.bytes(4, "magic") != kMagic) {
        throw FormatError("bad magic at byte offset 0 in '" + path.string() + "': not an RKEB file");
    }
    const std::uint32_t version = r.u32("version");
    if (version != kVersion) {
        throw FormatError("unsupported RKEB version " + std::to_string(version) + " at byte offset 4");
    }
    const std::uint32_t n = r.u32("N");
    const std::uint32_t d = r.u32("d");
    std::uint64_t expected = 0;
    const bool overflow = __builtin_mul_overflow(static_cast<std::uint64_t>(n), std::uint64_t{d} + 1, &expected) ||
                          __builtin_mul_overflow(expected, std::uint64_t{4}, &expected) ||
                          __builtin_add_overflow(expected, std::uint64_t{kHeaderBytes}, &expected);
    if (overflow || expected != r.size()) {
        const std::string expected_text = overflow ? std::string("more than 2^64") : std::to_string(expected);
        throw FormatError("RKEB size mismatch for N=" + std::to_string(n) + ", d=" + std::to_string(d) +
                          ": expected " + expected_text + " bytes, actual " + std::to_string(r.size()));
    }
    EmbeddingBatch batch{Matrix(n, d), std::vector<Label>(n)};
    for (double& v : batch.embeddings.data()) v = static_cast<double>(r.f32("embedding values"));
    for (Label& l : batch.labels) l = r.u32("labels");
    return batch;
}

Matrix quantize_to_storage(const Matrix& m) {
    Matrix out = m;
    for (double& v : out.data()) v = static_cast<double>(static_cast<float>(v));
    return out;
}

} // namespace rkd
