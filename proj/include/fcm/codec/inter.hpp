#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <vector>

#include "fcm/codec/config.hpp"
#include "fcm/codec/plane.hpp"

namespace fcm::codec {

/// Motion vector in quarter-sample units.
struct MotionVector {
    int x = 0;
    int y = 0;
    bool operator==(const MotionVector&) const = default;
    [[nodiscard]] bool is_integer() const { return (x & 3) == 0 && (y & 3) == 0; }
};

/// Search order / tie-break key: smaller |x|+|y|, then y, then x.
inline bool mv_precedes(MotionVector a, MotionVector b) {
    const int na = std::abs(a.x) + std::abs(a.y), nb = std::abs(b.x) + std::abs(b.y);
    if (na != nb) return na < nb;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
}

/// One or two motion hypotheses; ref index 0 is the previous frame, 1 the
/// frame before it. ref < 0 marks an unused hypothesis.
struct MotionInfo {
    std::array<std::int8_t, 2> ref{-1, -1};
    std::array<MotionVector, 2> mv{};

    static MotionInfo uni(int r, MotionVector v) {
        MotionInfo m;
        m.ref[0] = static_cast<std::int8_t>(r);
        m.mv[0] = v;
        return m;
    }
    static MotionInfo bi(MotionVector v0, MotionVector v1) {
        MotionInfo m;
        m.ref = {0, 1};
        m.mv = {v0, v1};
        return m;
    }
    [[nodiscard]] bool valid() const { return ref[0] >= 0; }
    [[nodiscard]] bool is_bi() const { return ref[1] >= 0; }
    bool operator==(const MotionInfo& o) const {
        if (ref != o.ref) return false;
        if (mv[0] != o.mv[0]) return false;
        return !is_bi() || mv[1] == o.mv[1];
    }
};

// ---------------------------------------------------------------------------
// Motion field on a 4x4 grid

struct MotionUnit {
    bool coded = false;
    bool inter = false;
    MotionInfo motion;
};

class MotionField {
public:
    MotionField() = default;
    MotionField(int width, int height) : w4_((width + 3) / 4), h4_((height + 3) / 4), units_(static_cast<std::size_t>(w4_) * h4_) {}

    [[nodiscard]] int width4() const { return w4_; }
    [[nodiscard]] int height4() const { return h4_; }
    [[nodiscard]] bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < 4 * w4_ && y < 4 * h4_; }
    /// Unit covering sample (x, y); callers check inside() first.
    [[nodiscard]] const MotionUnit& at(int x, int y) const { return units_[static_cast<std::size_t>(y >> 2) * w4_ + (x >> 2)]; }
    MotionUnit& unit(int ux, int uy) { return units_[static_cast<std::size_t>(uy) * w4_ + ux]; }
    [[nodiscard]] const MotionUnit& unit(int ux, int uy) const { return units_[static_cast<std::size_t>(uy) * w4_ + ux]; }

    void fill(const Rect& r, const MotionUnit& u) {
        for (int y = r.y >> 2; y < (r.y + r.h) >> 2; ++y)
            for (int x = r.x >> 2; x < (r.x + r.w) >> 2; ++x) unit(x, y) = u;
    }
    bool operator==(const MotionField&) const = default;

private:
    int w4_ = 0;
    int h4_ = 0;
    std::vector<MotionUnit> units_;
};

// ---------------------------------------------------------------------------
// Motion compensation (bilinear, quarter-sample positions, edge replication)

inline SamplePlane motion_compensate(const SamplePlane& ref, const Rect& blk, MotionVector mv) {
    SamplePlane out(blk.w, blk.h);
    const int ix = blk.x + (mv.x >> 2), iy = blk.y + (mv.y >> 2);
    const int fx = mv.x & 3, fy = mv.y & 3;
    const bool inside = ix >= 0 && iy >= 0 && ix + blk.w + 1 <= ref.width() && iy + blk.h + 1 <= ref.height();
    if (fx == 0 && fy == 0) {
        for (int y = 0; y < blk.h; ++y)
            for (int x = 0; x < blk.w; ++x) out(x, y) = inside ? ref(ix + x, iy + y) : ref.clamped(ix + x, iy + y);
        return out;
    }
    const int w00 = (4 - fx) * (4 - fy), w10 = fx * (4 - fy), w01 = (4 - fx) * fy, w11 = fx * fy;
    for (int y = 0; y < blk.h; ++y)
        for (int x = 0; x < blk.w; ++x) {
            const int sx = ix + x, sy = iy + y;
            int a, b, c, d;
            if (inside) {
                a = ref(sx, sy);
                b = ref(sx + 1, sy);
                c = ref(sx, sy + 1);
                d = ref(sx + 1, sy + 1);
            } else {
                a = ref.clamped(sx, sy);
                b = ref.clamped(sx + 1, sy);
                c = ref.clamped(sx, sy + 1);
                d = ref.clamped(sx + 1, sy + 1);
            }
            out(x, y) = (w00 * a + w10 * b + w01 * c + w11 * d + 8) >> 4;
        }
    return out;
}

/// Uni- or bi-prediction (equal weights) of a translational motion.
inline SamplePlane predict_motion(const std::vector<const SamplePlane*>& refs, const Rect& blk, const MotionInfo& m) {
    auto p0 = motion_compensate(*refs[m.ref[0]], blk, m.mv[0]);
    if (!m.is_bi()) return p0;
    const auto p1 = motion_compensate(*refs[m.ref[1]], blk, m.mv[1]);
    for (std::size_t i = 0; i < p0.data().size(); ++i) p0.data()[i] = (p0.data()[i] + p1.data()[i] + 1) >> 1;
    return p0;
}

/// Prediction from a per-4x4 motion list (row-major over the block).
inline SamplePlane predict_subblocks(const std::vector<const SamplePlane*>& refs, const Rect& blk,
                                     const std::vector<MotionInfo>& sub) {
    SamplePlane out(blk.w, blk.h);
    const int cols = blk.w / 4;
    for (int sy = 0; sy < blk.h / 4; ++sy)
        for (int sx = 0; sx < cols; ++sx) {
            const Rect r{blk.x + 4 * sx, blk.y + 4 * sy, 4, 4};
            out.paste(predict_motion(refs, r, sub[static_cast<std::size_t>(sy) * cols + sx]), 4 * sx, 4 * sy);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Full-search motion estimation

struct SearchResult {
    MotionVector mv;
    std::int64_t sad = std::numeric_limits<std::int64_t>::max();
};

namespace detail {

/// Integer offsets of a +-range window sorted by the tie-break key.
inline const std::vector<MotionVector>& ordered_offsets(int range) {
    static std::mutex mu;
    static std::map<int, std::vector<MotionVector>> cache;
    std::lock_guard lock(mu);
    auto& v = cache[range];
    if (v.empty()) {
        for (int y = -range; y <= range; ++y)
            for (int x = -range; x <= range; ++x) v.push_back({x, y});
        std::sort(v.begin(), v.end(), mv_precedes);
    }
    return v;
}

/// SAD at an integer offset, abandoning once `bound` is reached.
inline std::int64_t sad_int(const SamplePlane& cur, const SamplePlane& ref, int rx, int ry, std::int64_t bound) {
    std::int64_t s = 0;
    for (int y = 0; y < cur.height(); ++y) {
        const auto* a = cur.row(y);
        const auto* b = ref.row(ry + y) + rx;
        for (int x = 0; x < cur.width(); ++x) s += std::abs(a[x] - b[x]);
        if (s >= bound) return s;
    }
    return s;
}

}  // namespace detail

/// Exhaustive integer search over the window of +-search_range around
/// `center` (clipped to the frame and to |component| <= search_range),
/// minimising SAD with the mv_precedes tie-break; optional half-sample
/// refinement over the 8 bilinear neighbours.
inline SearchResult motion_search(const SamplePlane& cur, int bx, int by, const SamplePlane& ref, MotionVector center,
                                  int search_range, bool half_sample) {
    const int w = cur.width(), h = cur.height();
    const int cx = center.x / 4, cy = center.y / 4;  // integer part, toward zero
    const int xlo = std::max({cx - search_range, -search_range, -bx});
    const int xhi = std::min({cx + search_range, search_range, ref.width() - w - bx});
    const int ylo = std::max({cy - search_range, -search_range, -by});
    const int yhi = std::min({cy + search_range, search_range, ref.height() - h - by});
    SearchResult best;
    auto visit = [&](int x, int y) {
        const auto s = detail::sad_int(cur, ref, bx + x, by + y, best.sad);
        if (s < best.sad) {
            best.sad = s;
            best.mv = {4 * x, 4 * y};
        }
    };
    if (xlo > xhi || ylo > yhi) {
        best.mv = {};
        best.sad = detail::sad_int(cur, ref, std::clamp(bx, 0, ref.width() - w), std::clamp(by, 0, ref.height() - h),
                                   std::numeric_limits<std::int64_t>::max());
        return best;
    }
    if (cx == 0 && cy == 0) {
        for (const auto& o : detail::ordered_offsets(search_range))
            if (o.x >= xlo && o.x <= xhi && o.y >= ylo && o.y <= yhi) visit(o.x, o.y);
    } else {
        std::vector<MotionVector> cand;
        for (int y = ylo; y <= yhi; ++y)
            for (int x = xlo; x <= xhi; ++x) cand.push_back({x, y});
        std::sort(cand.begin(), cand.end(), mv_precedes);
        for (const auto& o : cand) visit(o.x, o.y);
    }
    if (!half_sample) return best;

    const int lim = 4 * search_range;
    const MotionVector base = best.mv;
    std::vector<MotionVector> cand;
    for (int dy = -2; dy <= 2; dy += 2)
        for (int dx = -2; dx <= 2; dx += 2) {
            if (!dx && !dy) continue;
            const MotionVector v{base.x + dx, base.y + dy};
            if (std::abs(v.x) > lim || std::abs(v.y) > lim) continue;
            // the bilinear footprint must stay inside the frame
            if (bx + (v.x >> 2) < 0 || by + (v.y >> 2) < 0) continue;
            if (bx + ((v.x + 3) >> 2) + w > ref.width() || by + ((v.y + 3) >> 2) + h > ref.height()) continue;
            cand.push_back(v);
        }
    std::sort(cand.begin(), cand.end(), mv_precedes);
    for (const auto& v : cand) {
        const auto p = motion_compensate(ref, {bx, by, w, h}, v);
        std::int64_t s = 0;
        for (std::size_t i = 0; i < p.data().size(); ++i) s += std::abs(p.data()[i] - cur.data()[i]);
        if (s < best.sad || (s == best.sad && mv_precedes(v, best.mv))) {
            best.sad = s;
            best.mv = v;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Merge candidates

enum class CandidateKind : std::uint8_t { spatial, mmvd, temporal, zero, sbtmvp, affine };

inline constexpr int kMmvdSteps[4] = {4, 8, 16, 32};  // 1, 2, 4, 8 samples
inline constexpr int kMmvdDir[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
inline constexpr int kMaxSpatial = 4;

struct MergeCandidate {
    CandidateKind kind = CandidateKind::zero;
    MotionInfo motion;               // translational motion (affine: control point 0)
    int mmvd_base = -1;              // index into the spatial candidates
    int mmvd_step = 0;
    int mmvd_dir = 0;
    MotionVector affine_cp1;         // top-right control point
    std::vector<MotionInfo> sub;     // per-4x4 motion for sub-block kinds
    static MergeCandidate make(CandidateKind k, const MotionInfo& m) {
        MergeCandidate c;
        c.kind = k;
        c.motion = m;
        return c;
    }
    [[nodiscard]] bool is_subblock() const { return kind == CandidateKind::sbtmvp || kind == CandidateKind::affine; }
};

inline MotionInfo mmvd_apply(const MotionInfo& base, int step, int dir) {
    MotionInfo m = base;
    const MotionVector d{kMmvdDir[dir][0] * kMmvdSteps[step], kMmvdDir[dir][1] * kMmvdSteps[step]};
    for (int k = 0; k < (m.is_bi() ? 2 : 1); ++k) m.mv[k] = {m.mv[k].x + d.x, m.mv[k].y + d.y};
    return m;
}

namespace detail {
inline int round_div(long long n, long long d) {  // nearest, ties up
    long long q = n >= 0 ? (2 * n + d) / (2 * d) : -((-2 * n + d - 1) / (2 * d));
    return static_cast<int>(q);
}
}  // namespace detail

/// 4-parameter affine motion at every 4x4 sub-block centre, rounded to the
/// half-sample grid.
inline std::vector<MotionInfo> affine_subblock_motion(int ref, MotionVector cp0, MotionVector cp1, int w, int h) {
    std::vector<MotionInfo> out;
    const int dx = cp1.x - cp0.x, dy = cp1.y - cp0.y;
    for (int sy = 0; sy < h / 4; ++sy)
        for (int sx = 0; sx < w / 4; ++sx) {
            const int px = 4 * sx + 2, py = 4 * sy + 2;
            const MotionVector v{cp0.x + 2 * detail::round_div(static_cast<long long>(dx) * px - static_cast<long long>(dy) * py, 2 * w),
                                 cp0.y + 2 * detail::round_div(static_cast<long long>(dy) * px + static_cast<long long>(dx) * py, 2 * w)};
            out.push_back(MotionInfo::uni(ref, v));
        }
    return out;
}

/// Ordered candidate list: spatial (A1, B1, B0, A0, B2; deduplicated; at
/// most 4), MMVD expansions of the first two spatial candidates, the
/// temporal candidate, a zero candidate when nothing else was found, then
/// SbTMVP and affine. `current` holds what is already coded in this
/// frame; `colocated` is the previous frame's field (null for none).
inline std::vector<MergeCandidate> inter_candidates(const Rect& cu, const MotionField& current, const MotionField* colocated,
                                                    const CodecConfig& cfg, int ref_count) {
    std::vector<MergeCandidate> out;
    auto neighbour = [&](int x, int y) -> const MotionUnit* {
        if (!current.inside(x, y)) return nullptr;
        const auto& u = current.at(x, y);
        if (!u.coded || !u.inter) return nullptr;
        if (u.motion.ref[0] >= ref_count || u.motion.ref[1] >= ref_count) return nullptr;
        return &u;
    };
    const int x0 = cu.x, y0 = cu.y, x1 = cu.x + cu.w - 1, y1 = cu.y + cu.h - 1;
    const std::array<std::pair<int, int>, 5> pos = {{{x0 - 1, y1}, {x1, y0 - 1}, {x1 + 1, y0 - 1}, {x0 - 1, y1 + 1}, {x0 - 1, y0 - 1}}};
    std::vector<MotionInfo> spatial;
    for (auto [x, y] : pos) {
        if (static_cast<int>(spatial.size()) == kMaxSpatial) break;
        const auto* u = neighbour(x, y);
        if (!u) continue;
        if (std::find(spatial.begin(), spatial.end(), u->motion) != spatial.end()) continue;
        spatial.push_back(u->motion);
    }
    for (const auto& m : spatial) out.push_back(MergeCandidate::make(CandidateKind::spatial, m));
    if (cfg.enabled(Tool::mmvd))
        for (int b = 0; b < std::min<int>(2, static_cast<int>(spatial.size())); ++b)
            for (int s = 0; s < 4; ++s)
                for (int d = 0; d < 4; ++d) {
                    auto c = MergeCandidate::make(CandidateKind::mmvd, mmvd_apply(spatial[b], s, d));
                    c.mmvd_base = b;
                    c.mmvd_step = s;
                    c.mmvd_dir = d;
                    out.push_back(c);
                }
    bool temporal = false;
    if (colocated) {
        const int cx = std::min(cu.x + cu.w / 2, 4 * colocated->width4() - 1);
        const int cy = std::min(cu.y + cu.h / 2, 4 * colocated->height4() - 1);
        const auto& u = colocated->at(cx, cy);
        if (u.inter && u.motion.ref[0] < ref_count && u.motion.ref[1] < ref_count &&
            std::find(spatial.begin(), spatial.end(), u.motion) == spatial.end()) {
            out.push_back(MergeCandidate::make(CandidateKind::temporal, u.motion));
            temporal = true;
        }
    }
    if (spatial.empty() && !temporal) out.push_back(MergeCandidate::make(CandidateKind::zero, MotionInfo::uni(0, {})));

    if (cfg.enabled(Tool::sbtmvp) && colocated) {
        auto c = MergeCandidate::make(CandidateKind::sbtmvp, MotionInfo::uni(0, {}));
        bool any = false;
        for (int sy = 0; sy < cu.h / 4; ++sy)
            for (int sx = 0; sx < cu.w / 4; ++sx) {
                const auto& u = colocated->at(cu.x + 4 * sx, cu.y + 4 * sy);
                const bool usable = u.inter && u.motion.ref[0] < ref_count && u.motion.ref[1] < ref_count;
                any |= usable;
                c.sub.push_back(usable ? u.motion : MotionInfo::uni(0, {}));
            }
        if (any) out.push_back(std::move(c));
    }
    if (cfg.enabled(Tool::affine)) {
        const auto* a = neighbour(x0 - 1, y0 - 1);
        const auto* b = neighbour(x1, y0 - 1);
        if (a && b && a->motion.ref[0] == b->motion.ref[0]) {
            auto c = MergeCandidate::make(CandidateKind::affine, MotionInfo::uni(a->motion.ref[0], a->motion.mv[0]));
            c.affine_cp1 = b->motion.mv[0];
            c.sub = affine_subblock_motion(a->motion.ref[0], a->motion.mv[0], c.affine_cp1, cu.w, cu.h);
            out.push_back(std::move(c));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Prediction blending

enum class BlendKind : std::uint8_t { bcw, geo, ciip };

struct BlendMode {
    BlendKind kind = BlendKind::bcw;
    int param = 2;  // bcw index 0..4 or geo split 0..1
};

/// BCW weight of p0 in eighths: {0.25, 0.375, 0.5, 0.625, 0.75}.
inline constexpr int kBcwWeight[5] = {2, 3, 4, 5, 6};
inline constexpr int kBcwDefault = 2;

/// GEO weight of p0 in eighths at (x, y). Split 0 cuts along the main
/// diagonal with p0 above it, split 1 along the anti-diagonal with p0
/// above-left; the weight ramps linearly across a band two samples wide.
inline int geo_weight(int split, int x, int y, int w, int h) {
    const double cx = x + 0.5, cy = y + 0.5;
    const double norm = std::sqrt(static_cast<double>(w) * w + static_cast<double>(h) * h);
    const double d = split == 0 ? (cx * h - cy * w) / norm : (static_cast<double>(w) * h - cx * h - cy * w) / norm;
    return std::clamp(static_cast<int>(std::lround(4.0 + 4.0 * d)), 0, 8);
}

inline SamplePlane blend_predictions(const SamplePlane& p0, const SamplePlane& p1, BlendMode mode) {
    const int w = p0.width(), h = p0.height();
    SamplePlane out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int a = p0(x, y), b = p1(x, y);
            int v = 0;
            switch (mode.kind) {
                case BlendKind::bcw: {
                    const int wt = kBcwWeight[mode.param];
                    v = (wt * a + (8 - wt) * b + 4) >> 3;
                    break;
                }
                case BlendKind::geo: {
                    const int wt = geo_weight(mode.param, x, y, w, h);
                    v = (wt * a + (8 - wt) * b + 4) >> 3;
                    break;
                }
                case BlendKind::ciip:
                    v = (a + b + 1) >> 1;
                    break;
            }
            out(x, y) = v;
        }
    return out;
}

}  // namespace fcm::codec
