#pragma once

#include <cstdint>
#include <cstdio>
#include <span>
#include <string>

namespace fcm {

/// 64-bit FNV-1a. Used for config digests and content keys, not for security.
class Fnv1a {
public:
    void update(std::span<const std::uint8_t> bytes) {
        for (auto b : bytes) {
            h_ ^= b;
            h_ *= 0x100000001b3ULL;
        }
    }
    void update_u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h_ ^= static_cast<std::uint8_t>(v >> (8 * i));
            h_ *= 0x100000001b3ULL;
        }
    }
    [[nodiscard]] std::uint64_t value() const { return h_; }
    [[nodiscard]] std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
        return buf;
    }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace fcm
