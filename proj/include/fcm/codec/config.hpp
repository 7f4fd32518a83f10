#pragma once

#include <algorithm>
#include <array>
#include <bitset>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fcm/binary_io.hpp"
#include "fcm/error.hpp"

namespace fcm::codec {

/// The fourteen switchable coding tools.
enum class Tool : std::uint8_t {
    mrl,
    isp,
    affine,
    sbtmvp,
    mts,
    sbt,
    depquant,
    bcw,
    geo,
    ciip,
    imv,
    mmvd,
    dbf,
    sao,
};

inline constexpr int kToolCount = 14;

inline constexpr std::array<Tool, kToolCount> kAllTools = {
    Tool::mrl, Tool::isp, Tool::affine, Tool::sbtmvp, Tool::mts,  Tool::sbt,  Tool::depquant,
    Tool::bcw, Tool::geo, Tool::ciip,   Tool::imv,    Tool::mmvd, Tool::dbf, Tool::sao,
};

/// Names as used by external encoder configuration files.
inline constexpr std::string_view tool_name(Tool t) {
    constexpr std::array<std::string_view, kToolCount> names = {
        "MRL", "ISP", "Affine", "SbTMVP", "MTS", "SBT", "DepQuant", "BCW", "Geo", "CIIP", "IMV", "MMVD", "DBF", "SAO",
    };
    return names[static_cast<int>(t)];
}

inline Tool parse_tool(std::string_view s) {
    for (auto t : kAllTools)
        if (tool_name(t) == s) return t;
    throw ConfigError("unknown tool '" + std::string(s) + "'");
}

class ToolSet {
public:
    constexpr ToolSet() = default;
    static ToolSet all() {
        ToolSet s;
        s.bits_.set();
        return s;
    }
    static ToolSet from_bits(std::uint16_t v) {
        ToolSet s;
        s.bits_ = std::bitset<kToolCount>(v);
        return s;
    }

    [[nodiscard]] bool has(Tool t) const { return bits_.test(static_cast<int>(t)); }
    ToolSet& set(Tool t, bool on = true) {
        bits_.set(static_cast<int>(t), on);
        return *this;
    }
    [[nodiscard]] bool none() const { return bits_.none(); }
    [[nodiscard]] std::size_t count() const { return bits_.count(); }
    [[nodiscard]] std::uint16_t bits() const { return static_cast<std::uint16_t>(bits_.to_ulong()); }

    ToolSet operator|(ToolSet o) const { return from_bits(bits() | o.bits()); }
    ToolSet operator&(ToolSet o) const { return from_bits(bits() & o.bits()); }
    ToolSet operator~() const { return from_bits(static_cast<std::uint16_t>(~bits() & ((1u << kToolCount) - 1))); }
    bool operator==(const ToolSet&) const = default;

private:
    std::bitset<kToolCount> bits_;
};

inline constexpr int kIntraModeCount = 67;
inline constexpr int kPlanar = 0;
inline constexpr int kDc = 1;
inline constexpr int kHorizontal = 18;
inline constexpr int kDiagonal = 34;
inline constexpr int kVertical = 50;

/// Subset of the 67 intra modes; planar and DC are always members.
class IntraModeSet {
public:
    IntraModeSet() { bits_.set(); }
    explicit IntraModeSet(const std::vector<int>& modes) {
        for (int m : modes) {
            if (m < 0 || m >= kIntraModeCount) throw ConfigError("intra mode out of range: " + std::to_string(m));
            bits_.set(m);
        }
        bits_.set(kPlanar);
        bits_.set(kDc);
    }
    [[nodiscard]] bool contains(int m) const { return m >= 0 && m < kIntraModeCount && bits_.test(m); }
    [[nodiscard]] std::vector<int> modes() const {
        std::vector<int> out;
        for (int m = 0; m < kIntraModeCount; ++m)
            if (bits_.test(m)) out.push_back(m);
        return out;
    }
    [[nodiscard]] int size() const { return static_cast<int>(bits_.count()); }
    [[nodiscard]] bool is_full() const { return bits_.all(); }
    bool operator==(const IntraModeSet&) const = default;

private:
    std::bitset<kIntraModeCount> bits_;
};

struct CodecConfig {
    int qp = 32;
    int ctu_size = 64;
    IntraModeSet allowed_intra_modes;
    int max_mtt_depth = 3;
    ToolSet tools = ToolSet::all();
    int search_range = 64;
    int ref_frames = 2;

    [[nodiscard]] bool enabled(Tool t) const { return tools.has(t); }
    CodecConfig& enable(Tool t, bool on = true) {
        tools.set(t, on);
        return *this;
    }
    bool operator==(const CodecConfig&) const = default;
};

inline void validate(const CodecConfig& c) {
    if (c.qp < 0 || c.qp > 63) throw ConfigError("qp must lie in 0..63");
    if (c.ctu_size != 32 && c.ctu_size != 64 && c.ctu_size != 128) throw ConfigError("ctu_size must be 32, 64 or 128");
    if (c.max_mtt_depth < 0 || c.max_mtt_depth > 3) throw ConfigError("max_mtt_depth must lie in 0..3");
    if (c.search_range < 1 || c.search_range > 256) throw ConfigError("search_range must lie in 1..256");
    if (c.ref_frames < 1 || c.ref_frames > 2) throw ConfigError("ref_frames must be 1 or 2");
    if (!c.allowed_intra_modes.contains(kPlanar) || !c.allowed_intra_modes.contains(kDc))
        throw ConfigError("planar and DC must be allowed");
}

/// Fixed-length serialisation carried inside the bitstream (qp excluded,
/// it lives in the container header).
inline void write_config(ByteWriter& w, const CodecConfig& c) {
    w.u8(static_cast<std::uint8_t>(c.ctu_size >> 5));
    w.u8(static_cast<std::uint8_t>(c.max_mtt_depth));
    w.u16(static_cast<std::uint16_t>(c.search_range));
    w.u8(static_cast<std::uint8_t>(c.ref_frames));
    w.u16(c.tools.bits());
    std::uint8_t modes[9] = {};
    for (int m : c.allowed_intra_modes.modes()) modes[m >> 3] |= static_cast<std::uint8_t>(1u << (m & 7));
    w.bytes(modes);
}

inline CodecConfig read_config(ByteReader& r, int qp) {
    CodecConfig c;
    c.qp = qp;
    c.ctu_size = r.u8("ctu size") << 5;
    c.max_mtt_depth = r.u8("mtt depth");
    c.search_range = r.u16("search range");
    c.ref_frames = r.u8("ref frames");
    c.tools = ToolSet::from_bits(r.u16("tool flags"));
    auto modes = r.bytes(9, "intra mode set");
    std::vector<int> list;
    for (int m = 0; m < kIntraModeCount; ++m)
        if (modes[m >> 3] & (1u << (m & 7))) list.push_back(m);
    c.allowed_intra_modes = IntraModeSet(list);
    validate(c);
    return c;
}

}  // namespace fcm::codec
