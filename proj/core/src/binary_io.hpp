// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Little-endian byte encoding shared by the RKEB and RKDP formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rkd/error.hpp"

namespace rkd::detail {

class ByteWriter {
public:
    void bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    const std::string& buffer() const noexcept { return out_; }

private:
    std::string out_;
};

class ByteReader {
public:
    explicit ByteReader(std::string data) : data_(std::move(data)) {}

    std::size_t offset() const noexcept { return pos_; }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t remaining() const noexcept { return data_.size() - pos_; }

    std::string bytes(std::size_t n, std::string_view field) {
        need(n, field);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::uint8_t u8(std::string_view field) {
        need(1, field);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }
    std::uint32_t u32(std::string_view field) {
        need(4, field);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64(std::string_view field) {
        need(8, field);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    float f32(std::string_view field) { return std::bit_cast<float>(u32(field)); }
    double f64(std::string_view field) { return std::bit_cast<double>(u64(field)); }

    [[noreturn]] void fail(std::string_view message) const {
        throw FormatError(std::string(message) + " at byte offset " + std::to_string(pos_));
    }

private:
    void need(std::size_t n, std::string_view field) const {
        if (remaining() < n) {
            throw FormatError("truncated file: field '" + std::string(field) + "' needs " +
                              std::to_string(n) + " bytes at byte offset " + std::to_string(pos_) +
                              ", " + std::to_string(remaining()) + " available");
        }
    }

    std::string data_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

} // namespace rkd::detail
