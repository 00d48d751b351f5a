// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "rkd/embedding_io.hpp"
#include "rkd/error.hpp"

namespace rkd {
namespace {

using testing::temp_path;

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream(p, std::ios::binary | std::ios::trunc).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

TEST(Rkeb, RoundTripAtStoragePrecision) {
    std::mt19937_64 rng(1);
    EmbeddingBatch b{testing::random_matrix(5, 3, rng), {0, 4, 2, 2, 7}};
    const auto path = temp_path("rt.rkeb");
    write_embeddings(path, b);
    const EmbeddingBatch back = read_embeddings(path);
    EXPECT_EQ(back.labels, b.labels);
    EXPECT_EQ(back.embeddings, quantize_to_storage(b.embeddings));
    for (std::size_t i = 0; i < b.embeddings.size(); ++i)
        EXPECT_EQ(back.embeddings[i], static_cast<double>(static_cast<float>(b.embeddings[i])));
    EXPECT_EQ(slurp(path).size(), 16u + 5 * 3 * 4 + 5 * 4);
}

TEST(Rkeb, ByteLayout) {
    const auto path = temp_path("layout.rkeb");
    write_embeddings(path, EmbeddingBatch{Matrix{{1.0, -2.0}}, {3}});
    const std::string bytes = slurp(path);
    ASSERT_EQ(bytes.size(), 28u);
    EXPECT_EQ(bytes.substr(0, 4), "RKEB");
    auto u32 = [&](std::size_t off) {
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[off + i]);
        return v;
    };
    EXPECT_EQ(u32(4), 1u);
    EXPECT_EQ(u32(8), 1u);
    EXPECT_EQ(u32(12), 2u);
    EXPECT_EQ(u32(16), 0x3f800000u);
    EXPECT_EQ(u32(20), 0xc0000000u);
    EXPECT_EQ(u32(24), 3u);
}

TEST(Rkeb, EmptyBatch) {
    const auto path = temp_path("empty.rkeb");
    write_embeddings(path, EmbeddingBatch{Matrix(0, 4), {}});
    const EmbeddingBatch back = read_embeddings(path);
    EXPECT_EQ(back.size(), 0u);
    EXPECT_EQ(back.dim(), 4u);
}

TEST(Rkeb, LabelCountMismatchOnWrite) {
    EXPECT_THROW(write_embeddings(temp_path("bad.rkeb"), EmbeddingBatch{Matrix(2, 2), {1}}), DimensionError);
}

TEST(Rkeb, MalformedFiles) {
    const auto path = temp_path("good.rkeb");
    write_embeddings(path, EmbeddingBatch{Matrix{{1, 2}, {3, 4}, {5, 6}}, {0, 1, 0}});
    const std::string good = slurp(path);
    const auto bad = temp_path("bad.rkeb");

    for (std::size_t cut = 0; cut < good.size(); ++cut) {
        spit(bad, good.substr(0, cut));
        EXPECT_THROW(read_embeddings(bad), FormatError) << cut;
    }
    std::string magic = good;
    magic[1] = 'Q';
    spit(bad, magic);
    EXPECT_THROW(read_embeddings(bad), FormatError);
    std::string version = good;
    version[4] = 2;
    spit(bad, version);
    EXPECT_THROW(read_embeddings(bad), FormatError);

    spit(bad, good + "x");
    try {
        read_embeddings(bad);
        FAIL();
    } catch (const FormatError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("expected 52"), std::string::npos) << what;
        EXPECT_NE(what.find("actual 53"), std::string::npos) << what;
    }
    std::string huge = good;
    huge[8] = huge[9] = huge[10] = huge[11] = '\xff';
    huge[12] = huge[13] = huge[14] = huge[15] = '\xff';
    spit(bad, huge);
    EXPECT_THROW(read_embeddings(bad), FormatError);
}

TEST(Rkeb, RandomBytesNeverCrash) {
    std::mt19937_64 rng(99);
    const auto bad = temp_path("fuzz.rkeb");
    for (int trial = 0; trial < 200; ++trial) {
        std::string bytes(std::uniform_int_distribution<int>(0, 64)(rng), '\0');
        for (char& c : bytes) c = static_cast<char>(rng());
        if (trial % 2 == 0 && bytes.size() >= 8) std::memcpy(bytes.data(), "RKEB\x01\0\0\0", 8);
        spit(bad, bytes);
        try {
            (void)read_embeddings(bad);
        } catch (const FormatError&) {
        }
    }
}

} // namespace
} // namespace rkd
