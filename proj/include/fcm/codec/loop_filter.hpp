#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <vector>

#include "fcm/codec/config.hpp"
#include "fcm/codec/entropy.hpp"
#include "fcm/codec/inter.hpp"
#include "fcm/codec/plane.hpp"
#include "fcm/codec/residual.hpp"

namespace fcm::codec {

/// CU layout of a frame on the 4x4 grid: owning CU id plus motion.
struct CuMap {
    Plane<std::int32_t> id;
    MotionField motion;

    CuMap() = default;
    CuMap(int width, int height) : id((width + 3) / 4, (height + 3) / 4, -1), motion(width, height) {}

    void assign(const Rect& r, int cu_id, const MotionUnit& u) {
        for (int y = r.y >> 2; y < (r.y + r.h) >> 2; ++y)
            for (int x = r.x >> 2; x < (r.x + r.w) >> 2; ++x) id(x, y) = cu_id;
        motion.fill(r, u);
    }
};

// ---------------------------------------------------------------------------
// Deblocking

namespace detail {

inline bool needs_deblock(const MotionUnit& a, const MotionUnit& b) {
    if (a.inter != b.inter) return true;
    if (!a.inter) return false;
    const auto& m = a.motion;
    const auto& n = b.motion;
    if (m.ref != n.ref) return true;
    for (int k = 0; k < (m.is_bi() ? 2 : 1); ++k)
        if (std::abs(m.mv[k].x - n.mv[k].x) >= 4 || std::abs(m.mv[k].y - n.mv[k].y) >= 4) return true;
    return false;
}

/// Filters one line p1 p0 | q0 q1; returns whether a sample changed.
inline bool deblock_line(std::int32_t& p1, std::int32_t& p0, std::int32_t& q0, std::int32_t& q1, int limit) {
    if (std::abs(p0 - q0) >= limit) return false;
    const int delta = (9 * (q0 - p0) - 3 * (q1 - p1) + 8) >> 4;
    if (delta == 0) return false;
    p0 = clip_sample(p0 + delta);
    q0 = clip_sample(q0 - delta);
    p1 = clip_sample(p1 + (delta >> 1));
    q1 = clip_sample(q1 - (delta >> 1));
    return true;
}

}  // namespace detail

/// Smooths CU boundaries where prediction mode or motion differs: vertical
/// edges first, then horizontal edges, on the 4x4 grid. `touched`, when
/// given, flags the 4x4 units on both sides of every modified edge.
inline void deblock(SamplePlane& frame, const CuMap& map, int qp, Plane<std::uint8_t>* touched = nullptr) {
    auto touch = [touched](int ax, int ay, int bx, int by) {
        if (!touched) return;
        (*touched)(ax, ay) = 1;
        (*touched)(bx, by) = 1;
    };
    const int limit = std::max(1, static_cast<int>(std::lround(2.0 * qstep(qp))));
    const int w4 = map.id.width(), h4 = map.id.height();
    for (int uy = 0; uy < h4; ++uy)
        for (int ux = 1; ux < w4; ++ux) {
            if (map.id(ux - 1, uy) == map.id(ux, uy)) continue;
            if (!detail::needs_deblock(map.motion.unit(ux - 1, uy), map.motion.unit(ux, uy))) continue;
            const int x = 4 * ux;
            bool changed = false;
            for (int y = 4 * uy; y < 4 * uy + 4; ++y) {
                auto* r = frame.row(y);
                changed |= detail::deblock_line(r[x - 2], r[x - 1], r[x], r[x + 1], limit);
            }
            if (changed) touch(ux - 1, uy, ux, uy);
        }
    for (int uy = 1; uy < h4; ++uy)
        for (int ux = 0; ux < w4; ++ux) {
            if (map.id(ux, uy - 1) == map.id(ux, uy)) continue;
            if (!detail::needs_deblock(map.motion.unit(ux, uy - 1), map.motion.unit(ux, uy))) continue;
            const int y = 4 * uy;
            bool changed = false;
            for (int x = 4 * ux; x < 4 * ux + 4; ++x)
                changed |= detail::deblock_line(frame(x, y - 2), frame(x, y - 1), frame(x, y), frame(x, y + 1), limit);
            if (changed) touch(ux, uy - 1, ux, uy);
        }
}

// ---------------------------------------------------------------------------
// Sample adaptive offset

enum class SaoType : std::uint8_t { off, band, edge };

inline constexpr int kSaoMaxOffset = 7;
inline constexpr int kSaoBandShift = 5;   // 32 bands of 32 values
inline constexpr int kSaoBandStarts = 29;
inline constexpr int kSaoEdgeDirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {-1, 1}};

struct SaoParams {
    SaoType type = SaoType::off;
    int band_start = 0;  // band mode
    int direction = 0;   // edge mode
    std::array<int, 4> offsets{};
    bool operator==(const SaoParams&) const = default;
};

namespace detail {

/// Edge category 0..3 of sample c against neighbours a and b, or -1.
inline int edge_category(int a, int c, int b) {
    const int s = (c < a ? -1 : c > a ? 1 : 0) + (c < b ? -1 : c > b ? 1 : 0);
    switch (s) {
        case -2: return 0;  // local minimum
        case -1: return 1;
        case 1: return 2;
        case 2: return 3;   // local maximum
        default: return -1;
    }
}

/// Category of sample (x, y) under `p`, or -1 when unaffected. `src` is
/// the pre-SAO frame; neighbours outside it disable edge classification.
inline int sao_category(const SamplePlane& src, int x, int y, const SaoParams& p) {
    if (p.type == SaoType::band) {
        const int k = (src(x, y) >> kSaoBandShift) - p.band_start;
        return k >= 0 && k < 4 ? k : -1;
    }
    const int dx = kSaoEdgeDirs[p.direction][0], dy = kSaoEdgeDirs[p.direction][1];
    const int ax = x - dx, ay = y - dy, bx = x + dx, by = y + dy;
    if (ax < 0 || bx < 0 || ay < 0 || ax >= src.width() || bx >= src.width() || by >= src.height()) return -1;
    return edge_category(src(ax, ay), src(x, y), src(bx, by));
}

inline double sao_offset_bits(int o) {
    const int m = std::abs(o);
    return std::min(m + 1, kSaoMaxOffset) + (m ? 1.0 : 0.0);
}

}  // namespace detail

/// Rate used by the SAO decision; type bins are priced at one bit each.
inline double sao_header_bits(SaoType t) {
    switch (t) {
        case SaoType::off: return 1.0;
        case SaoType::band: return 2.0 + 5.0;
        case SaoType::edge: return 2.0 + 2.0;
    }
    return 0.0;
}

inline double sao_param_bits(const SaoParams& p) {
    double b = sao_header_bits(p.type);
    if (p.type != SaoType::off)
        for (int o : p.offsets) b += detail::sao_offset_bits(o);
    return b;
}

/// Adds offsets to the samples of `region`, reading classifications from `src`.
inline void sao_apply(const SamplePlane& src, SamplePlane& dst, const Rect& region, const SaoParams& p) {
    if (p.type == SaoType::off) return;
    for (int y = region.y; y < region.y + region.h; ++y)
        for (int x = region.x; x < region.x + region.w; ++x) {
            const int k = detail::sao_category(src, x, y, p);
            if (k >= 0) dst(x, y) = clip_sample(src(x, y) + p.offsets[k]);
        }
}

struct SaoDecision {
    SaoParams params;
    double cost = 0.0;  // SSE change plus lambda-weighted parameter bits
};

namespace detail {

/// Samples of each SAO category, pre-SAO and original.
struct CategoryStats {
    std::array<std::vector<std::int32_t>, 4> rec;
    std::array<std::vector<std::int32_t>, 4> org;
};

inline double offset_delta(const std::vector<std::int32_t>& rec, const std::vector<std::int32_t>& org, int o) {
    double d = 0.0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const double before = org[i] - rec[i];
        const double after = org[i] - clip_sample(rec[i] + o);
        d += after * after - before * before;
    }
    return d;
}

inline double choose_offsets(const CategoryStats& st, double lambda, std::array<int, 4>& out) {
    double total = 0.0;
    for (int k = 0; k < 4; ++k) {
        double best = lambda * sao_offset_bits(0);
        out[k] = 0;
        if (!st.rec[k].empty())
            for (int o = -kSaoMaxOffset; o <= kSaoMaxOffset; ++o) {
                if (!o) continue;
                const double j = offset_delta(st.rec[k], st.org[k], o) + lambda * sao_offset_bits(o);
                if (j < best) {
                    best = j;
                    out[k] = o;
                }
            }
        total += best;
    }
    return total;
}

}  // namespace detail

/// RD choice of SAO parameters for one region. Ties keep the earlier
/// candidate in the order off, band starts ascending, edge directions.
inline SaoDecision sao_decide(const SamplePlane& orig, const SamplePlane& rec, const Rect& region, double lambda) {
    SaoDecision best;
    best.cost = lambda * sao_param_bits(best.params);
    auto consider = [&](SaoParams p) {
        detail::CategoryStats st;
        for (int y = region.y; y < region.y + region.h; ++y)
            for (int x = region.x; x < region.x + region.w; ++x) {
                const int k = detail::sao_category(rec, x, y, p);
                if (k < 0) continue;
                st.rec[k].push_back(rec(x, y));
                st.org[k].push_back(orig(x, y));
            }
        const double j = detail::choose_offsets(st, lambda, p.offsets) + lambda * sao_header_bits(p.type);
        if (j < best.cost) {
            best.cost = j;
            best.params = p;
        }
    };
    for (int s = 0; s < kSaoBandStarts; ++s) {
        SaoParams p;
        p.type = SaoType::band;
        p.band_start = s;
        consider(p);
    }
    for (int d = 0; d < 4; ++d) {
        SaoParams p;
        p.type = SaoType::edge;
        p.direction = d;
        consider(p);
    }
    return best;
}

struct SaoContexts {
    Context type_on;
    Context type_edge;
};

template <typename C>
void code_sao(C& c, SaoContexts& ctx, SaoParams& p) {
    const bool on = c.bin(ctx.type_on, p.type != SaoType::off);
    if (!on) {
        p = SaoParams{};
        return;
    }
    const bool edge = c.bin(ctx.type_edge, p.type == SaoType::edge);
    p.type = edge ? SaoType::edge : SaoType::band;
    if (edge)
        p.direction = static_cast<int>(c.bypass_bits(static_cast<std::uint32_t>(p.direction), 2));
    else
        p.band_start = static_cast<int>(c.bypass_bits(static_cast<std::uint32_t>(p.band_start), 5));
    if (p.band_start >= kSaoBandStarts) throw CorruptionError("SAO band start out of range");
    for (int& o : p.offsets) {
        int m = 0;
        const int want = std::abs(o);
        while (m < kSaoMaxOffset && c.bypass(want > m)) ++m;
        const bool neg = m ? c.bypass(o < 0) : false;
        o = neg ? -m : m;
    }
}

/// Deblocking then SAO, each gated by its tool flag. `sao` holds one entry
/// per CTU in raster order and is ignored when SAO is disabled.
inline SamplePlane loop_filter(const SamplePlane& frame, const CuMap& map, const CodecConfig& cfg,
                               const std::vector<SaoParams>& sao = {}) {
    SamplePlane out = frame;
    if (cfg.enabled(Tool::dbf)) deblock(out, map, cfg.qp);
    if (cfg.enabled(Tool::sao) && !sao.empty()) {
        const SamplePlane src = out;
        const int cols = (frame.width() + cfg.ctu_size - 1) / cfg.ctu_size;
        for (std::size_t i = 0; i < sao.size(); ++i) {
            const int cx = static_cast<int>(i % cols) * cfg.ctu_size, cy = static_cast<int>(i / cols) * cfg.ctu_size;
            const Rect r{cx, cy, std::min(cfg.ctu_size, frame.width() - cx), std::min(cfg.ctu_size, frame.height() - cy)};
            sao_apply(src, out, r, sao[i]);
        }
    }
    return out;
}

}  // namespace fcm::codec
