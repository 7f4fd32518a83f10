#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fcm/error.hpp"

namespace fcm {

/// Appends little-endian scalars to a growable byte buffer.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { put_le(v); }
    void u32(std::uint32_t v) { put_le(v); }
    void u64(std::uint64_t v) { put_le(v); }
    void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }
    void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
    void text(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

    [[nodiscard]] const std::vector<std::uint8_t>& data() const { return buf_; }
    [[nodiscard]] std::vector<std::uint8_t> take() { return std::move(buf_); }
    [[nodiscard]] std::size_t size() const { return buf_.size(); }

private:
    template <typename T>
    void put_le(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    std::vector<std::uint8_t> buf_;
};

/// Bounds-checked little-endian reader. Running past the end throws
/// CorruptionError with the supplied context string.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8(std::string_view what = "u8") { return get_le<std::uint8_t>(what); }
    std::uint16_t u16(std::string_view what = "u16") { return get_le<std::uint16_t>(what); }
    std::uint32_t u32(std::string_view what = "u32") { return get_le<std::uint32_t>(what); }
    std::uint64_t u64(std::string_view what = "u64") { return get_le<std::uint64_t>(what); }
    float f32(std::string_view what = "f32") { return std::bit_cast<float>(get_le<std::uint32_t>(what)); }
    double f64(std::string_view what = "f64") { return std::bit_cast<double>(get_le<std::uint64_t>(what)); }

    std::span<const std::uint8_t> bytes(std::size_t n, std::string_view what = "bytes") {
        require(n, what);
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    [[nodiscard]] std::size_t position() const { return pos_; }
    [[nodiscard]] std::size_t remaining() const { return data_.size() - pos_; }
    [[nodiscard]] bool at_end() const { return pos_ == data_.size(); }

private:
    void require(std::size_t n, std::string_view what) const {
        if (data_.size() - pos_ < n)
            throw CorruptionError("truncated data while reading " + std::string(what));
    }

    template <typename T>
    T get_le(std::string_view what) {
        require(sizeof(T), what);
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(T(data_[pos_ + i]) << (8 * i));
        pos_ += sizeof(T);
        return v;
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return out;
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline std::string read_text_file(const std::filesystem::path& path) {
    auto b = read_file(path);
    return {b.begin(), b.end()};
}

}  // namespace fcm
