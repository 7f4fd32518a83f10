#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "fcm/codec/config.hpp"
#include "fcm/codec/plane.hpp"

namespace fcm::codec {

/// Reference samples of one line around a W x H block. Index j of `top`
/// is the sample at x = j - 1 - line on row -1 - line; index j of `left`
/// is y = j - 1 - line on column -1 - line. Index 0 of both is the corner.
struct IntraRefs {
    int width = 0;
    int height = 0;
    int line = 0;
    std::vector<std::int32_t> top;
    std::vector<std::int32_t> left;

    [[nodiscard]] std::int32_t top_at(int x) const { return top[x + 1 + line]; }
    [[nodiscard]] std::int32_t left_at(int y) const { return left[y + 1 + line]; }
};

inline int intra_ref_length(int w, int h, int line) { return w + h + 2 * line + 2; }

/// Builds references from reconstructed samples. `available(x, y)` tells
/// whether a frame position already holds reconstruction. Gaps take the
/// nearest preceding available sample along the bottom-left -> corner ->
/// top-right path; with nothing available everything is 512.
template <typename Avail>
IntraRefs build_intra_refs(const SamplePlane& rec, Avail&& available, Rect blk, int line) {
    IntraRefs r;
    r.width = blk.w;
    r.height = blk.h;
    r.line = line;
    const int len = intra_ref_length(blk.w, blk.h, line);
    // path: left[len-1] ... left[1], corner, top[1] ... top[len-1]
    const int path_len = 2 * len - 1;
    std::vector<std::int32_t> val(path_len, 0);
    std::vector<std::uint8_t> ok(path_len, 0);
    auto sample = [&](int fx, int fy, int k) {
        if (fx >= 0 && fy >= 0 && fx < rec.width() && fy < rec.height() && available(fx, fy)) {
            val[k] = rec(fx, fy);
            ok[k] = 1;
        }
    };
    const int base_x = blk.x - 1 - line, base_y = blk.y - 1 - line;
    for (int j = len - 1; j >= 1; --j) sample(base_x, base_y + j, len - 1 - j);
    sample(base_x, base_y, len - 1);
    for (int j = 1; j < len; ++j) sample(base_x + j, base_y, len - 1 + j);

    int first = -1;
    for (int k = 0; k < path_len; ++k)
        if (ok[k]) {
            first = k;
            break;
        }
    if (first < 0) {
        std::fill(val.begin(), val.end(), 512);
    } else {
        for (int k = 0; k < first; ++k) val[k] = val[first];
        for (int k = first + 1; k < path_len; ++k)
            if (!ok[k]) val[k] = val[k - 1];
    }
    r.left.resize(len);
    r.top.resize(len);
    for (int j = 0; j < len; ++j) {
        r.left[j] = val[len - 1 - j];
        r.top[j] = val[len - 1 + j];
    }
    return r;
}

/// Displacement per sample row/column in 1/32 units for angular modes.
/// Modes 2..66 are 65 directions spaced pi/64 apart, 2 = bottom-left
/// diagonal, 18 = horizontal, 34 = top-left diagonal, 50 = vertical,
/// 66 = top-right diagonal.
inline int intra_angle(int mode) {
    static const auto table = [] {
        std::array<int, kIntraModeCount> t{};
        for (int m = 2; m < kIntraModeCount; ++m) {
            const int steps = m < kDiagonal ? kHorizontal - m : m - kVertical;
            t[m] = static_cast<int>(std::lround(32.0 * std::tan(steps * std::numbers::pi / 64.0)));
        }
        return t;
    }();
    return table[mode];
}

namespace detail {

inline std::int32_t interp32(const std::vector<std::int32_t>& ref, int pos32) {
    if (pos32 < 0) pos32 = 0;
    const int j = pos32 >> 5, f = pos32 & 31;
    const int last = static_cast<int>(ref.size()) - 1;
    const std::int32_t a = ref[std::min(j, last)];
    const std::int32_t b = ref[std::min(j + 1, last)];
    return ((32 - f) * a + f * b + 16) >> 5;
}

}  // namespace detail

inline SamplePlane intra_predict_planar(const IntraRefs& r) {
    const int w = r.width, h = r.height;
    SamplePlane p(w, h);
    const int tr = r.top_at(w), bl = r.left_at(h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int hor = (w - 1 - x) * r.left_at(y) + (x + 1) * tr;
            const int ver = (h - 1 - y) * r.top_at(x) + (y + 1) * bl;
            p(x, y) = (hor * h + ver * w + w * h) / (2 * w * h);
        }
    return p;
}

inline SamplePlane intra_predict(int mode, const IntraRefs& r) {
    const int w = r.width, h = r.height, line = r.line;
    SamplePlane p(w, h);
    if (mode == kPlanar) return intra_predict_planar(r);
    if (mode == kDc) {
        int s = 0;
        for (int x = 0; x < w; ++x) s += r.top_at(x);
        for (int y = 0; y < h; ++y) s += r.left_at(y);
        const int dc = (s + (w + h) / 2) / (w + h);
        for (auto& v : p.data()) v = dc;
        return p;
    }
    const int a = intra_angle(mode);
    const int off = (1 + line) << 5;
    if (mode >= kDiagonal) {
        for (int y = 0; y < h; ++y) {
            const int d = y + 1 + line;
            for (int x = 0; x < w; ++x) {
                const int pos = (x << 5) + d * a;
                if (pos >= -off) {
                    p(x, y) = detail::interp32(r.top, pos + off);
                } else {
                    const int side = (y << 5) - ((x + 1 + line) << 10) / -a;
                    p(x, y) = detail::interp32(r.left, side + off);
                }
            }
        }
    } else {
        for (int x = 0; x < w; ++x) {
            const int d = x + 1 + line;
            for (int y = 0; y < h; ++y) {
                const int pos = (y << 5) + d * a;
                if (pos >= -off) {
                    p(x, y) = detail::interp32(r.left, pos + off);
                } else {
                    const int side = (x << 5) - ((y + 1 + line) << 10) / -a;
                    p(x, y) = detail::interp32(r.top, side + off);
                }
            }
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Intra sub-partitions

enum class IspDirection : std::uint8_t { vertical = 1, horizontal = 2 };

/// Sub-blocks in coding order. Blocks narrower than 8 in either dimension
/// are returned unsplit.
inline std::vector<Rect> isp_partitions(Rect blk, IspDirection dir) {
    if (blk.w < 8 || blk.h < 8) return {blk};
    std::vector<Rect> out;
    if (dir == IspDirection::vertical) {
        const int n = blk.w == 8 ? 2 : 4;
        const int sw = blk.w / n;
        for (int i = 0; i < n; ++i) out.push_back({blk.x + i * sw, blk.y, sw, blk.h});
    } else {
        const int n = blk.h == 8 ? 2 : 4;
        const int sh = blk.h / n;
        for (int i = 0; i < n; ++i) out.push_back({blk.x, blk.y + i * sh, blk.w, sh});
    }
    return out;
}

}  // namespace fcm::codec
