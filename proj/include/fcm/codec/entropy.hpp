#pragma once

// Adaptive binary range coder. Probabilities are 15-bit estimates of the
// bin being 0 and adapt with an exponential-decay update after every bin.
//
// Syntax code is written once against the Coder concept below and run with
// three backends: RangeEncoder (writes), RangeDecoder (reads) and
// RateEstimator (sums -log2 p from a frozen context snapshot). Every
// coding call takes the value and returns the value actually coded, so
// encoder and decoder share a single syntax order.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fcm/error.hpp"

namespace fcm::codec {

inline constexpr int kProbBits = 15;
inline constexpr std::uint32_t kProbOne = 1u << kProbBits;
inline constexpr int kAdaptShift = 5;

struct Context {
    std::uint16_t p0 = kProbOne / 2;  // probability that the bin is 0

    void update(bool bin) {
        if (bin)
            p0 = static_cast<std::uint16_t>(p0 - (p0 >> kAdaptShift));
        else
            p0 = static_cast<std::uint16_t>(p0 + ((kProbOne - p0) >> kAdaptShift));
    }
};

/// -log2 of a 15-bit probability, tabulated at 1/512 resolution.
inline double prob_cost(std::uint32_t p) {
    static const auto table = [] {
        std::array<double, 513> t{};
        for (int i = 1; i <= 512; ++i) t[i] = -std::log2(i / 512.0);
        t[0] = t[1];
        return t;
    }();
    return table[(p + 32) >> 6];
}

inline double bin_cost(const Context& c, bool bin) { return prob_cost(bin ? kProbOne - c.p0 : c.p0); }

class RangeEncoder {
public:
    static constexpr bool kReading = false;

    bool bin(Context& c, bool b) {
        const std::uint32_t bound = (range_ >> kProbBits) * c.p0;
        if (!b) {
            range_ = bound;
        } else {
            low_ += bound;
            range_ -= bound;
        }
        c.update(b);
        normalize();
        return b;
    }

    bool bypass(bool b) {
        range_ >>= 1;
        if (b) low_ += range_;
        normalize();
        return b;
    }

    std::uint32_t bypass_bits(std::uint32_t v, int n) {
        for (int i = n - 1; i >= 0; --i) bypass((v >> i) & 1u);
        return v;
    }

    /// Flushes two bytes instead of five: low is rounded up to a multiple of
    /// 2^24, which stays inside [low, low + range), so the three bytes
    /// below it are zero and left implicit (the decoder reads zeros there).
    std::vector<std::uint8_t> finish() {
        low_ = (low_ + 0xFFFFFFu) & ~std::uint64_t{0xFFFFFFu};
        shift_low();
        shift_low();
        // the first byte of an LZMA-style stream is always zero
        out_.erase(out_.begin());
        return std::move(out_);
    }

    [[nodiscard]] std::size_t bytes_so_far() const { return out_.size() + cache_size_; }

private:
    void normalize() {
        while (range_ < (1u << 24)) {
            range_ <<= 8;
            shift_low();
        }
    }

    void shift_low() {
        if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
            const auto carry = static_cast<std::uint8_t>(low_ >> 32);
            std::uint8_t temp = cache_;
            do {
                out_.push_back(static_cast<std::uint8_t>(temp + carry));
                temp = 0xFF;
            } while (--cache_size_ != 0);
            cache_ = static_cast<std::uint8_t>(low_ >> 24);
        }
        ++cache_size_;
        low_ = (low_ & 0x00FFFFFFu) << 8;
    }

    std::uint64_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint8_t cache_ = 0;
    std::uint64_t cache_size_ = 1;
    std::vector<std::uint8_t> out_;
};

class RangeDecoder {
public:
    static constexpr bool kReading = true;

    explicit RangeDecoder(std::span<const std::uint8_t> data) : data_(data) {
        for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
    }

    bool bin(Context& c, bool /*ignored*/) {
        const std::uint32_t bound = (range_ >> kProbBits) * c.p0;
        bool b;
        if (code_ < bound) {
            range_ = bound;
            b = false;
        } else {
            code_ -= bound;
            range_ -= bound;
            b = true;
        }
        c.update(b);
        normalize();
        return b;
    }

    bool bypass(bool /*ignored*/) {
        range_ >>= 1;
        bool b = false;
        if (code_ >= range_) {
            code_ -= range_;
            b = true;
        }
        normalize();
        return b;
    }

    std::uint32_t bypass_bits(std::uint32_t /*ignored*/, int n) {
        std::uint32_t v = 0;
        for (int i = 0; i < n; ++i) v = (v << 1) | static_cast<std::uint32_t>(bypass(false));
        return v;
    }

    /// Bytes read beyond the payload (implicit zeros). A well-formed stream
    /// never needs more than three.
    [[nodiscard]] std::size_t overrun() const { return pos_ > data_.size() ? pos_ - data_.size() : 0; }

private:
    std::uint32_t next_byte() {
        const std::size_t p = pos_++;
        if (p < data_.size()) return data_[p];
        if (p >= data_.size() + 3) throw CorruptionError("range decoder ran past the end of the payload");
        return 0;
    }
    void normalize() {
        while (range_ < (1u << 24)) {
            range_ <<= 8;
            code_ = (code_ << 8) | next_byte();
        }
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    std::uint32_t code_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
};

/// Rate model for RDO: prices bins against whatever contexts it is handed
/// without adapting them.
class RateEstimator {
public:
    static constexpr bool kReading = false;

    bool bin(const Context& c, bool b) {
        bits_ += bin_cost(c, b);
        return b;
    }
    bool bypass(bool b) {
        bits_ += 1.0;
        return b;
    }
    std::uint32_t bypass_bits(std::uint32_t v, int n) {
        bits_ += n;
        return v;
    }
    [[nodiscard]] double bits() const { return bits_; }
    void reset() { bits_ = 0.0; }

private:
    double bits_ = 0.0;
};

// Shared binarisations -------------------------------------------------------

/// Truncated unary with the first bin context-coded and the rest bypass.
template <typename C, typename Ctx>
int code_truncated_unary(C& c, Ctx& first, int value, int max_value) {
    int v = 0;
    for (int i = 0; i < max_value; ++i) {
        const bool more = i == 0 ? c.bin(first, value > i) : c.bypass(value > i);
        if (!more) break;
        ++v;
    }
    return v;
}

/// Zeroth-order Exp-Golomb, bypass coded.
template <typename C>
std::uint32_t code_exp_golomb(C& c, std::uint32_t value) {
    int len = 0;
    if constexpr (!C::kReading)
        while ((value + 1) >> (len + 1)) ++len;
    int n = 0;
    while (c.bypass(n < len)) ++n;
    const std::uint32_t suffix = c.bypass_bits((value + 1) - (1u << n), n);
    return (1u << n) + suffix - 1;
}

/// Truncated binary over [0, n).
template <typename C>
int code_truncated_binary(C& c, int value, int n) {
    if (n <= 1) return 0;
    int k = 0;
    while ((1 << (k + 1)) <= n) ++k;
    const int u = (1 << (k + 1)) - n;
    if constexpr (C::kReading) {
        int v = static_cast<int>(c.bypass_bits(0, k));
        if (v < u) return v;
        v = (v << 1) | static_cast<int>(c.bypass(false));
        return v - u;
    } else {
        if (value < u) return static_cast<int>(c.bypass_bits(static_cast<std::uint32_t>(value), k)), value;
        c.bypass_bits(static_cast<std::uint32_t>(value + u), k + 1);
        return value;
    }
}

}  // namespace fcm::codec
