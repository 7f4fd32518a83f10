#pragma once

// Tiling of feature channels into 10-bit frames and the exact inverse.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fcm/binary_io.hpp"
#include "fcm/digest.hpp"
#include "fcm/error.hpp"
#include "fcm/tensor_io.hpp"

namespace fcm {

inline constexpr int kBitDepth = 10;
inline constexpr int kMaxSample = (1 << kBitDepth) - 1;
inline constexpr std::uint16_t kPadSample = 512;

/// Single-channel 10-bit video, frames stored row-major in 16-bit words.
struct PackedVideo {
    int frame_count = 0;
    int height = 0;
    int width = 0;
    std::vector<std::vector<std::uint16_t>> frames;

    [[nodiscard]] std::size_t frame_area() const { return static_cast<std::size_t>(height) * width; }
    bool operator==(const PackedVideo&) const = default;
};

inline void validate(const PackedVideo& v) {
    if (v.frame_count < 1 || v.height < 1 || v.width < 1) throw ValidationError("packed video has a zero dimension");
    if (static_cast<int>(v.frames.size()) != v.frame_count) throw ValidationError("frame count mismatch");
    for (const auto& f : v.frames) {
        if (f.size() != v.frame_area()) throw ValidationError("frame size mismatch");
        for (auto s : f)
            if (s > kMaxSample) throw ValidationError("sample exceeds 10-bit range");
    }
}

/// Digest of the sample data and geometry; keys the sweep result store.
inline std::string content_digest(const PackedVideo& v) {
    Fnv1a h;
    h.update_u64(static_cast<std::uint64_t>(v.frame_count));
    h.update_u64(static_cast<std::uint64_t>(v.height));
    h.update_u64(static_cast<std::uint64_t>(v.width));
    for (const auto& f : v.frames)
        h.update(std::span(reinterpret_cast<const std::uint8_t*>(f.data()), f.size() * sizeof(std::uint16_t)));
    return h.hex();
}

struct TileOrigin {
    std::uint32_t x = 0;
    std::uint32_t y = 0;
    bool operator==(const TileOrigin&) const = default;
};

struct TensorLayout {
    int id = 1;
    int frames = 1;
    int channels = 1;
    int height = 1;
    int width = 1;
    double min_value = 0.0;
    double max_value = 0.0;
    int grid_columns = 1;
    int grid_rows = 1;
    std::vector<TileOrigin> tiles;  // one per channel
    bool operator==(const TensorLayout&) const = default;
};

/// Layout conventions understood by unpack.
enum class TileOrder : std::uint8_t { near_square_raster = 1 };

struct PackInfo {
    TileOrder order = TileOrder::near_square_raster;
    int frame_count = 0;
    int frame_height = 0;
    int frame_width = 0;
    std::vector<TensorLayout> tensors;
    std::string source_tag;

    [[nodiscard]] bool empty() const { return tensors.empty(); }
    bool operator==(const PackInfo&) const = default;
};

/// Checks bounds ordering, per-channel tile existence, containment and
/// pairwise disjointness (through a coverage map).
inline void validate(const PackInfo& info) {
    if (info.frame_height < 1 || info.frame_width < 1) throw ValidationError("pack info has empty frame");
    std::vector<std::uint8_t> cover(static_cast<std::size_t>(info.frame_height) * info.frame_width, 0);
    for (const auto& t : info.tensors) {
        if (!(t.min_value <= t.max_value)) throw ValidationError("tensor bounds out of order");
        if (static_cast<int>(t.tiles.size()) != t.channels)
            throw ValidationError("tensor " + std::to_string(t.id) + " tile count differs from channel count");
        for (const auto& o : t.tiles) {
            if (o.x + static_cast<std::uint32_t>(t.width) > static_cast<std::uint32_t>(info.frame_width) ||
                o.y + static_cast<std::uint32_t>(t.height) > static_cast<std::uint32_t>(info.frame_height))
                throw ValidationError("tile outside frame");
            for (int y = 0; y < t.height; ++y)
                for (int x = 0; x < t.width; ++x) {
                    auto& c = cover[(o.y + y) * static_cast<std::size_t>(info.frame_width) + o.x + x];
                    if (c) throw ValidationError("tiles overlap");
                    c = 1;
                }
        }
    }
}

inline int round_up(int v, int multiple) { return (v + multiple - 1) / multiple * multiple; }

struct PackResult {
    PackedVideo video;
    PackInfo info;
};

/// Quantises each tensor with bounds taken over all frames and tiles its
/// channels row-major into a ceil(sqrt(C))-column grid; grids stack
/// vertically and the frame pads with 512 to a multiple of `align`.
inline PackResult pack(const FeatureTensorSet& set, int align = 64) {
    validate(set);
    if (align < 1) throw ValidationError("alignment must be positive");
    PackInfo info;
    info.source_tag = set.source_tag;
    info.frame_count = set.frames();
    int width = 0, height = 0;
    for (const auto& t : set.tensors) {
        TensorLayout l;
        l.id = t.id;
        l.frames = t.frames;
        l.channels = t.channels;
        l.height = t.height;
        l.width = t.width;
        const auto [lo, hi] = std::minmax_element(t.data.begin(), t.data.end());
        l.min_value = *lo;
        l.max_value = *hi;
        l.grid_columns = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(t.channels)) - 1e-12));
        while (l.grid_columns * l.grid_columns < t.channels) ++l.grid_columns;
        l.grid_rows = ceil_div(t.channels, l.grid_columns);
        for (int c = 0; c < t.channels; ++c)
            l.tiles.push_back({static_cast<std::uint32_t>((c % l.grid_columns) * t.width),
                               static_cast<std::uint32_t>(height + (c / l.grid_columns) * t.height)});
        width = std::max(width, l.grid_columns * t.width);
        height += l.grid_rows * t.height;
        info.tensors.push_back(std::move(l));
    }
    info.frame_width = round_up(width, align);
    info.frame_height = round_up(height, align);

    PackedVideo video;
    video.frame_count = info.frame_count;
    video.height = info.frame_height;
    video.width = info.frame_width;
    video.frames.assign(video.frame_count, std::vector<std::uint16_t>(video.frame_area(), kPadSample));
    for (std::size_t n = 0; n < set.tensors.size(); ++n) {
        const auto& t = set.tensors[n];
        const auto& l = info.tensors[n];
        const double range = l.max_value - l.min_value;
        for (int f = 0; f < t.frames; ++f) {
            auto& frame = video.frames[f];
            for (int c = 0; c < t.channels; ++c) {
                const auto o = l.tiles[c];
                for (int y = 0; y < t.height; ++y)
                    for (int x = 0; x < t.width; ++x) {
                        std::uint16_t q = 0;
                        if (range > 0.0) {
                            const double r = std::round(kMaxSample * (t.at(f, c, y, x) - l.min_value) / range);
                            q = static_cast<std::uint16_t>(std::clamp(r, 0.0, static_cast<double>(kMaxSample)));
                        }
                        frame[(o.y + y) * static_cast<std::size_t>(video.width) + o.x + x] = q;
                    }
            }
        }
    }
    return {std::move(video), std::move(info)};
}

inline FeatureTensorSet unpack(const PackedVideo& video, const PackInfo& info) {
    validate(info);
    if (info.empty()) throw ValidationError("pack info carries no tensor layout");
    if (video.frame_count != info.frame_count || video.height != info.frame_height || video.width != info.frame_width ||
        static_cast<int>(video.frames.size()) != video.frame_count)
        throw ValidationError("video geometry does not match pack info");
    FeatureTensorSet set;
    set.source_tag = info.source_tag;
    for (const auto& l : info.tensors) {
        if (l.frames != info.frame_count) throw ValidationError("tensor frame count differs from video");
        FeatureTensor t;
        t.id = l.id;
        t.frames = l.frames;
        t.channels = l.channels;
        t.height = l.height;
        t.width = l.width;
        t.data.resize(t.element_count());
        const double range = l.max_value - l.min_value;
        for (int f = 0; f < t.frames; ++f) {
            const auto& frame = video.frames[f];
            for (int c = 0; c < t.channels; ++c) {
                const auto o = l.tiles[c];
                for (int y = 0; y < t.height; ++y)
                    for (int x = 0; x < t.width; ++x) {
                        const auto q = frame[(o.y + y) * static_cast<std::size_t>(video.width) + o.x + x];
                        t.at(f, c, y, x) = static_cast<float>(l.min_value + q * range / kMaxSample);
                    }
            }
        }
        set.tensors.push_back(std::move(t));
    }
    return set;
}

// ---------------------------------------------------------------------------
// PKV container

namespace detail {
inline constexpr char kPkvMagic[4] = {'P', 'K', 'V', '1'};
inline constexpr std::uint16_t kPkvVersion = 1;
}  // namespace detail

/// PKV layout after the fixed header: tile order u8, tensor count u16, per
/// tensor (id u16, T/C/H/W u32, min/max f64, columns/rows u32, C tile
/// origins as u32 x,y), source tag (u32 length + bytes), then samples.
/// A tensor count of 0 marks a bare video without layout.
inline std::vector<std::uint8_t> encode_packed(const PackedVideo& video, const PackInfo& info) {
    validate(video);
    ByteWriter w;
    w.text(std::string_view(detail::kPkvMagic, 4));
    w.u16(detail::kPkvVersion);
    w.u32(static_cast<std::uint32_t>(video.frame_count));
    w.u32(static_cast<std::uint32_t>(video.height));
    w.u32(static_cast<std::uint32_t>(video.width));
    w.u8(static_cast<std::uint8_t>(info.order));
    w.u16(static_cast<std::uint16_t>(info.tensors.size()));
    for (const auto& t : info.tensors) {
        w.u16(static_cast<std::uint16_t>(t.id));
        w.u32(static_cast<std::uint32_t>(t.frames));
        w.u32(static_cast<std::uint32_t>(t.channels));
        w.u32(static_cast<std::uint32_t>(t.height));
        w.u32(static_cast<std::uint32_t>(t.width));
        w.f64(t.min_value);
        w.f64(t.max_value);
        w.u32(static_cast<std::uint32_t>(t.grid_columns));
        w.u32(static_cast<std::uint32_t>(t.grid_rows));
        for (const auto& o : t.tiles) {
            w.u32(o.x);
            w.u32(o.y);
        }
    }
    w.u32(static_cast<std::uint32_t>(info.source_tag.size()));
    w.text(info.source_tag);
    for (const auto& f : video.frames)
        for (auto s : f) w.u16(s);
    return w.take();
}

inline PackResult decode_packed(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || !std::equal(detail::kPkvMagic, detail::kPkvMagic + 4, bytes.begin()))
        throw FormatError("not a PKV file (bad magic)");
    ByteReader r(bytes);
    r.bytes(4);
    if (const auto v = r.u16("version"); v != detail::kPkvVersion)
        throw FormatError("unsupported PKV version " + std::to_string(v));
    PackResult out;
    auto& video = out.video;
    auto& info = out.info;
    video.frame_count = static_cast<int>(r.u32("T_f"));
    video.height = static_cast<int>(r.u32("H_f"));
    video.width = static_cast<int>(r.u32("W_f"));
    if (video.frame_count < 1 || video.height < 1 || video.width < 1) throw FormatError("PKV has a zero dimension");
    info.order = static_cast<TileOrder>(r.u8("tile order"));
    if (info.order != TileOrder::near_square_raster) throw FormatError("unknown tile order");
    info.frame_count = video.frame_count;
    info.frame_height = video.height;
    info.frame_width = video.width;
    const int count = r.u16("tensor count");
    for (int i = 0; i < count; ++i) {
        TensorLayout t;
        t.id = r.u16();
        t.frames = static_cast<int>(r.u32());
        t.channels = static_cast<int>(r.u32());
        t.height = static_cast<int>(r.u32());
        t.width = static_cast<int>(r.u32());
        t.min_value = r.f64();
        t.max_value = r.f64();
        t.grid_columns = static_cast<int>(r.u32());
        t.grid_rows = static_cast<int>(r.u32());
        if (t.channels < 1 || static_cast<std::size_t>(t.channels) > r.remaining() / 8)
            throw CorruptionError("tile table truncated");
        for (int c = 0; c < t.channels; ++c) {
            TileOrigin o;
            o.x = r.u32("tile x");
            o.y = r.u32("tile y");
            t.tiles.push_back(o);
        }
        info.tensors.push_back(std::move(t));
    }
    const auto tag_len = r.u32("source tag length");
    auto tag = r.bytes(tag_len, "source tag");
    info.source_tag.assign(tag.begin(), tag.end());
    const std::size_t area = video.frame_area();
    if (r.remaining() != area * video.frame_count * 2) throw CorruptionError("PKV sample payload has wrong length");
    video.frames.assign(video.frame_count, std::vector<std::uint16_t>(area));
    for (auto& f : video.frames)
        for (auto& s : f) s = r.u16();
    validate(video);
    if (!info.empty()) validate(info);
    return out;
}

inline void save_packed(const PackedVideo& video, const PackInfo& info, const std::filesystem::path& path) {
    write_file(path, encode_packed(video, info));
}

inline PackResult load_packed(const std::filesystem::path& path) { return decode_packed(read_file(path)); }

}  // namespace fcm
