#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fcm/codec/config.hpp"
#include "fcm/codec/cu_record.hpp"
#include "fcm/codec/entropy.hpp"
#include "fcm/codec/inter.hpp"
#include "fcm/codec/intra.hpp"
#include "fcm/codec/loop_filter.hpp"
#include "fcm/codec/residual.hpp"
#include "fcm/codec/transform.hpp"

namespace fcm::codec {

inline double rd_lambda(int qp) { return 0.57 * std::exp2((qp - 12) / 3.0); }

// ---------------------------------------------------------------------------
// Partitioning

enum class SplitMode : std::uint8_t { none, qt, bh, bv, th, tv };

struct CodingNode {
    Rect r;
    int qt_depth = 0;
    int mt_depth = 0;
};

struct SplitOptions {
    bool forced_qt = false;
    std::array<bool, 6> allowed{};  // indexed by SplitMode
    [[nodiscard]] bool any_split() const {
        for (int i = 1; i < 6; ++i)
            if (allowed[i]) return true;
        return false;
    }
    [[nodiscard]] bool any_mtt() const { return allowed[2] || allowed[3] || allowed[4] || allowed[5]; }
};

/// QT while no MTT split has happened (down to 8x8); binary/ternary splits
/// for nodes up to 32x32 within the MTT depth limit, sides >= 4. Nodes
/// crossing the frame border are split by QT without signalling.
inline SplitOptions split_options(const CodingNode& n, const CodecConfig& cfg, int fw, int fh) {
    SplitOptions o;
    const auto& r = n.r;
    if (r.x + r.w > fw || r.y + r.h > fh) {
        o.forced_qt = true;
        o.allowed[static_cast<int>(SplitMode::qt)] = true;
        return o;
    }
    o.allowed[static_cast<int>(SplitMode::qt)] = n.mt_depth == 0 && r.w == r.h && r.w >= 16;
    if (n.mt_depth < cfg.max_mtt_depth && r.w <= 32 && r.h <= 32) {
        o.allowed[static_cast<int>(SplitMode::bh)] = r.h >= 8;
        o.allowed[static_cast<int>(SplitMode::bv)] = r.w >= 8;
        o.allowed[static_cast<int>(SplitMode::th)] = r.h >= 16;
        o.allowed[static_cast<int>(SplitMode::tv)] = r.w >= 16;
    }
    return o;
}

inline std::vector<CodingNode> split_children(const CodingNode& n, SplitMode m, int fw, int fh) {
    std::vector<CodingNode> out;
    const auto& r = n.r;
    auto mt = [&](Rect c) { out.push_back({c, n.qt_depth, n.mt_depth + 1}); };
    switch (m) {
        case SplitMode::none: break;
        case SplitMode::qt: {
            const int hw = r.w / 2, hh = r.h / 2;
            for (int k = 0; k < 4; ++k) {
                const Rect c{r.x + (k & 1) * hw, r.y + (k >> 1) * hh, hw, hh};
                if (c.x < fw && c.y < fh) out.push_back({c, n.qt_depth + 1, n.mt_depth});
            }
            break;
        }
        case SplitMode::bh:
            mt({r.x, r.y, r.w, r.h / 2});
            mt({r.x, r.y + r.h / 2, r.w, r.h / 2});
            break;
        case SplitMode::bv:
            mt({r.x, r.y, r.w / 2, r.h});
            mt({r.x + r.w / 2, r.y, r.w / 2, r.h});
            break;
        case SplitMode::th:
            mt({r.x, r.y, r.w, r.h / 4});
            mt({r.x, r.y + r.h / 4, r.w, r.h / 2});
            mt({r.x, r.y + 3 * r.h / 4, r.w, r.h / 4});
            break;
        case SplitMode::tv:
            mt({r.x, r.y, r.w / 4, r.h});
            mt({r.x + r.w / 4, r.y, r.w / 2, r.h});
            mt({r.x + 3 * r.w / 4, r.y, r.w / 4, r.h});
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Contexts

struct SyntaxContexts {
    std::array<Context, 5> split;
    Context split_qt, mtt_vertical, mtt_ternary;
    Context skip, pred_intra;
    Context mrl, isp, planar, dc, mts;
    std::array<Context, 2> cbf;  // intra, inter
    Context merge, subblock, mmvd, geo, ciip, merge_idx;
    Context bi, ref1, imv, bcw, mvd_nz, root_cbf, sbt;
    ResidualContexts res;
};

// ---------------------------------------------------------------------------
// CU syntax

struct CuSyntax {
    Rect r;
    int qt_depth = 0;
    int mt_depth = 0;
    bool intra = true;
    bool skip = false;
    // intra
    int intra_mode = kPlanar;
    int mrl = 0;
    int isp = 0;  // 0 none, 1 vertical, 2 horizontal
    // merge
    bool merge = false;
    MergeType merge_type = MergeType::regular;
    int merge_idx = 0;  // regular list index, or sub-block list index
    bool mmvd = false;
    int mmvd_base = 0, mmvd_step = 0, mmvd_dir = 0;
    int geo_split = 0, geo_idx0 = 0, geo_idx1 = 1;
    bool ciip = false;
    // explicit motion
    int inter_dir = 0;  // 0: ref 0, 1: ref 1, 2: bi
    bool imv = false;
    std::array<MotionVector, 2> mvd{};
    int bcw = kBcwDefault;
    // residual
    bool root_cbf = false;
    int sbt = 0;  // 0 off, else 1 + 2*idx + pos
    int mts = 0;
    std::vector<SamplePlane> levels;  // one per transform unit, all-zero = cbf 0

    [[nodiscard]] bool any_cbf() const {
        for (const auto& l : levels)
            for (int v : l.data())
                if (v) return true;
        return false;
    }
};

inline bool has_nonzero(const SamplePlane& p) {
    for (int v : p.data())
        if (v) return true;
    return false;
}

struct TuShape {
    Rect r;
    TransformPair types;
};

/// Transform units of a CU, in coding order.
inline std::vector<TuShape> tu_layout(const CuSyntax& cu) {
    std::vector<TuShape> out;
    const auto& r = cu.r;
    if (cu.intra && cu.isp) {
        for (const auto& p : isp_partitions(r, static_cast<IspDirection>(cu.isp))) out.push_back({p, {}});
        return out;
    }
    if (!cu.intra && cu.sbt) {
        const int idx = (cu.sbt - 1) >> 1, pos = (cu.sbt - 1) & 1;
        Rect t = r;
        TransformPair tp;
        if (idx == 0) {
            t.w = r.w / 2;
            t.x = r.x + pos * t.w;
            tp = pos == 0 ? TransformPair{TransformType::dct8, TransformType::dst7} : TransformPair{TransformType::dst7, TransformType::dst7};
        } else {
            t.h = r.h / 2;
            t.y = r.y + pos * t.h;
            tp = pos == 0 ? TransformPair{TransformType::dst7, TransformType::dct8} : TransformPair{TransformType::dst7, TransformType::dst7};
        }
        if (t.w > 32) tp.h = TransformType::dct2;
        if (t.h > 32) tp.v = TransformType::dct2;
        out.push_back({t, tp});
        return out;
    }
    const int tw = std::min(r.w, 64), th = std::min(r.h, 64);
    const auto tp = mts_pair(cu.mts);
    for (int y = r.y; y < r.y + r.h; y += th)
        for (int x = r.x; x < r.x + r.w; x += tw) out.push_back({{x, y, tw, th}, tp});
    return out;
}

inline bool mts_allowed(const CuSyntax& cu, const ToolSet& tools) {
    if (!tools.has(Tool::mts) || cu.r.w > 32 || cu.r.h > 32) return false;
    return cu.intra ? cu.isp == 0 : cu.sbt == 0;
}

inline bool sbt_allowed(const CuSyntax& cu, const ToolSet& tools) {
    return tools.has(Tool::sbt) && !cu.intra && (cu.r.w >= 8 || cu.r.h >= 8) && cu.r.w <= 64 && cu.r.h <= 64;
}

inline bool isp_allowed(const CuSyntax& cu, const ToolSet& tools) {
    return tools.has(Tool::isp) && cu.mrl == 0 && cu.r.w >= 8 && cu.r.h >= 8 && cu.r.w <= 64 && cu.r.h <= 64;
}

// ---------------------------------------------------------------------------
// Frame coding state shared by encoder and decoder

struct FrameState {
    const CodecConfig* cfg = nullptr;
    ToolSet tools;
    QuantMode qmode = QuantMode::scalar;
    int width = 0;
    int height = 0;
    int index = 0;
    bool inter = false;
    int ref_count = 0;
    std::vector<const SamplePlane*> refs;
    const MotionField* colocated = nullptr;

    SamplePlane recon;
    Plane<std::uint8_t> avail;  // 4x4 units holding reconstruction
    CuMap map;
    SyntaxContexts ctx;
    int next_cu_id = 0;

    FrameState(const CodecConfig& c, ToolSet active, int w, int h, int frame_index)
        : cfg(&c), tools(active), qmode(active.has(Tool::depquant) ? QuantMode::depquant : QuantMode::scalar), width(w),
          height(h), index(frame_index), recon(w, h), avail(w / 4, h / 4, 0), map(w, h) {}

    [[nodiscard]] bool available(int x, int y) const { return avail(x >> 2, y >> 2) != 0; }

    [[nodiscard]] Rect clip(const Rect& r) const {
        return {r.x, r.y, std::min(r.w, width - r.x), std::min(r.h, height - r.y)};
    }
    void mark(const Rect& r, std::uint8_t v = 1) {
        const Rect c = clip(r);
        for (int y = c.y >> 2; y < (c.y + c.h) >> 2; ++y)
            for (int x = c.x >> 2; x < (c.x + c.w) >> 2; ++x) avail(x, y) = v;
    }
    /// Forgets everything coded inside r.
    void clear(const Rect& r) {
        mark(r, 0);
        map.assign(clip(r), -1, MotionUnit{});
    }
};

/// Merge candidates of a CU split into the syntax lists.
struct MergeLists {
    std::vector<MergeCandidate> all;
    std::vector<int> regular;   // spatial, temporal, zero
    std::vector<int> subblock;  // sbtmvp, affine
    int bases = 0;              // spatial candidates usable by MMVD
};

inline MergeLists merge_lists(const FrameState& fs, const Rect& r) {
    MergeLists m;
    CodecConfig c = *fs.cfg;
    c.tools = fs.tools;
    m.all = inter_candidates(r, fs.map.motion, fs.colocated, c, fs.ref_count);
    int spatial = 0;
    for (int i = 0; i < static_cast<int>(m.all.size()); ++i) {
        const auto k = m.all[i].kind;
        if (k == CandidateKind::spatial) ++spatial;
        if (k == CandidateKind::spatial || k == CandidateKind::temporal || k == CandidateKind::zero) m.regular.push_back(i);
        if (m.all[i].is_subblock()) m.subblock.push_back(i);
    }
    if (fs.tools.has(Tool::mmvd)) m.bases = std::min(spatial, 2);
    return m;
}

inline bool subblock_merge_ok(const MergeLists& m, const Rect& r) { return !m.subblock.empty() && r.w >= 8 && r.h >= 8; }
inline bool geo_ok(const FrameState& fs, const MergeLists& m, const Rect& r) {
    return fs.tools.has(Tool::geo) && m.regular.size() >= 2 && r.w >= 8 && r.h >= 8;
}
inline bool ciip_ok(const FrameState& fs, const Rect& r, bool skip) {
    return fs.tools.has(Tool::ciip) && !skip && r.w >= 8 && r.h >= 8;
}

/// Intra modes other than planar and DC, ascending.
inline std::vector<int> angular_modes(const IntraModeSet& s) {
    std::vector<int> out;
    for (int m : s.modes())
        if (m != kPlanar && m != kDc) out.push_back(m);
    return out;
}

/// Half-sample (or integer with IMV) grid motion predictor.
inline MotionVector motion_predictor(const MergeLists& m, bool imv) {
    MotionVector p = m.regular.empty() ? MotionVector{} : m.all[m.regular[0]].motion.mv[0];
    const int mask = imv ? ~3 : ~1;
    return {p.x & mask, p.y & mask};
}

inline MotionInfo explicit_motion(const CuSyntax& cu, const MergeLists& m) {
    const MotionVector p = motion_predictor(m, cu.imv);
    const int unit = cu.imv ? 4 : 2;
    auto mv = [&](int k) { return MotionVector{p.x + unit * cu.mvd[k].x, p.y + unit * cu.mvd[k].y}; };
    if (cu.inter_dir == 2) return MotionInfo::bi(mv(0), mv(1));
    return MotionInfo::uni(cu.inter_dir, mv(0));
}

/// Motion of the merge candidate selected by a (non-sub-block, non-GEO) merge CU.
inline MotionInfo merge_motion(const CuSyntax& cu, const MergeLists& m) {
    if (cu.mmvd) return mmvd_apply(m.all[cu.mmvd_base].motion, cu.mmvd_step, cu.mmvd_dir);
    return m.all[m.regular[cu.merge_idx]].motion;
}

// ---------------------------------------------------------------------------
// Syntax coding, shared by writing, rate estimation and parsing

namespace detail {

template <typename C>
int code_signed(C& c, Context& nz, int v) {
    if (!c.bin(nz, v != 0)) return 0;
    const auto mag = code_exp_golomb(c, static_cast<std::uint32_t>(std::abs(v) - 1)) + 1;
    if (mag > (1u << 15)) throw CorruptionError("motion vector difference out of range");
    const bool neg = c.bypass(v < 0);
    return neg ? -static_cast<int>(mag) : static_cast<int>(mag);
}

template <typename C>
int code_bypass_value(C& c, int v, int bits) {
    return static_cast<int>(c.bypass_bits(static_cast<std::uint32_t>(v), bits));
}

}  // namespace detail

template <typename C>
SplitMode code_split(C& c, SyntaxContexts& ctx, const CodingNode& n, const SplitOptions& o, SplitMode mode) {
    if (o.forced_qt) return SplitMode::qt;
    if (!o.any_split()) return SplitMode::none;
    auto ok = [&](SplitMode m) { return o.allowed[static_cast<int>(m)]; };
    if (!c.bin(ctx.split[std::min(n.qt_depth + n.mt_depth, 4)], mode != SplitMode::none)) return SplitMode::none;
    const bool qt_ok = ok(SplitMode::qt), mtt_ok = o.any_mtt();
    bool qt = qt_ok;
    if (qt_ok && mtt_ok) qt = c.bin(ctx.split_qt, mode == SplitMode::qt);
    if (qt) return SplitMode::qt;
    const bool ver_ok = ok(SplitMode::bv) || ok(SplitMode::tv), hor_ok = ok(SplitMode::bh) || ok(SplitMode::th);
    bool vertical = ver_ok;
    if (ver_ok && hor_ok) vertical = c.bin(ctx.mtt_vertical, mode == SplitMode::bv || mode == SplitMode::tv);
    const SplitMode bin_mode = vertical ? SplitMode::bv : SplitMode::bh;
    const SplitMode ter_mode = vertical ? SplitMode::tv : SplitMode::th;
    bool ternary = ok(ter_mode);
    if (ok(bin_mode) && ok(ter_mode)) ternary = c.bin(ctx.mtt_ternary, mode == ter_mode);
    return ternary ? ter_mode : bin_mode;
}

/// Residual part: transform units (cbf + levels) and the MTS index.
template <typename C>
void code_residual(C& c, SyntaxContexts& ctx, CuSyntax& cu, const FrameState& fs) {
    if constexpr (requires { c.residual_section(true); }) c.residual_section(true);
    const auto tus = tu_layout(cu);
    if constexpr (C::kReading) {
        cu.levels.clear();
        for (const auto& t : tus) cu.levels.emplace_back(t.r.w, t.r.h);
    }
    bool any = false;
    for (std::size_t k = 0; k < tus.size(); ++k) {
        auto& lv = cu.levels[k];
        bool cbf;
        const bool inferred = !cu.intra && k + 1 == tus.size() && !any;
        if (inferred)
            cbf = true;
        else
            cbf = c.bin(ctx.cbf[cu.intra ? 0 : 1], C::kReading ? false : has_nonzero(lv));
        if (cbf) code_levels(c, ctx.res, lv, fs.qmode);
        any |= cbf;
    }
    if (any && mts_allowed(cu, fs.tools)) {
        if (c.bin(ctx.mts, cu.mts != 0))
            cu.mts = 1 + detail::code_bypass_value(c, cu.mts - 1, 2);
        else
            cu.mts = 0;
    } else {
        cu.mts = 0;
    }
    if constexpr (requires { c.residual_section(false); }) c.residual_section(false);
}

template <typename C>
void code_merge_data(C& c, SyntaxContexts& ctx, CuSyntax& cu, const FrameState& fs, const MergeLists& m) {
    const auto& r = cu.r;
    cu.merge = true;
    if (subblock_merge_ok(m, r) && c.bin(ctx.subblock, cu.merge_type == MergeType::sbtmvp || cu.merge_type == MergeType::affine)) {
        cu.merge_idx = code_truncated_binary(c, cu.merge_idx, static_cast<int>(m.subblock.size()));
        cu.merge_type = m.all[m.subblock[cu.merge_idx]].kind == CandidateKind::sbtmvp ? MergeType::sbtmvp : MergeType::affine;
        cu.mmvd = cu.ciip = false;
        return;
    }
    if (m.bases > 0 && c.bin(ctx.mmvd, cu.mmvd)) {
        cu.mmvd = true;
        cu.merge_type = MergeType::regular;
        cu.mmvd_base = m.bases == 2 ? static_cast<int>(c.bypass(cu.mmvd_base == 1)) : 0;
        cu.mmvd_step = detail::code_bypass_value(c, cu.mmvd_step, 2);
        cu.mmvd_dir = detail::code_bypass_value(c, cu.mmvd_dir, 2);
        cu.ciip = false;
        return;
    }
    cu.mmvd = false;
    const int n = static_cast<int>(m.regular.size());
    if (geo_ok(fs, m, r) && c.bin(ctx.geo, cu.merge_type == MergeType::geo)) {
        cu.merge_type = MergeType::geo;
        cu.geo_split = static_cast<int>(c.bypass(cu.geo_split == 1));
        cu.geo_idx0 = code_truncated_binary(c, cu.geo_idx0, n);
        const int i1 = code_truncated_binary(c, cu.geo_idx1 - (cu.geo_idx1 > cu.geo_idx0), n - 1);
        cu.geo_idx1 = i1 + (i1 >= cu.geo_idx0);
        cu.ciip = false;
        return;
    }
    cu.merge_type = MergeType::regular;
    cu.ciip = ciip_ok(fs, r, cu.skip) ? c.bin(ctx.ciip, cu.ciip) : false;
    int v = 0;
    for (int i = 0; i < n - 1; ++i) {
        const bool more = i == 0 ? c.bin(ctx.merge_idx, cu.merge_idx > i) : c.bypass(cu.merge_idx > i);
        if (!more) break;
        ++v;
    }
    cu.merge_idx = v;
}

/// Whole CU syntax. When reading, cu.r / depths must be set by the caller.
template <typename C>
void code_cu(C& c, SyntaxContexts& ctx, CuSyntax& cu, const FrameState& fs, const MergeLists* m) {
    const auto& r = cu.r;
    cu.skip = fs.inter ? c.bin(ctx.skip, cu.skip) : false;
    if (cu.skip) {
        cu.intra = false;
        cu.root_cbf = false;
        cu.levels.clear();
        cu.sbt = cu.mts = 0;
        code_merge_data(c, ctx, cu, fs, *m);
        return;
    }
    cu.intra = fs.inter ? c.bin(ctx.pred_intra, cu.intra) : true;
    if (cu.intra) {
        cu.merge = false;
        cu.mrl = fs.tools.has(Tool::mrl) ? code_truncated_unary(c, ctx.mrl, cu.mrl, 2) : 0;
        const int isp_in = cu.isp;
        cu.isp = 0;
        if (isp_allowed(cu, fs.tools) && c.bin(ctx.isp, isp_in != 0)) cu.isp = 1 + static_cast<int>(c.bypass(isp_in == 2));
        const auto& modes = fs.cfg->allowed_intra_modes;
        const auto others = angular_modes(modes);
        if (c.bin(ctx.planar, cu.intra_mode == kPlanar)) {
            cu.intra_mode = kPlanar;
        } else if (others.empty() || c.bin(ctx.dc, cu.intra_mode == kDc)) {
            cu.intra_mode = kDc;
        } else {
            int idx = 0;
            if constexpr (!C::kReading) idx = static_cast<int>(std::find(others.begin(), others.end(), cu.intra_mode) - others.begin());
            cu.intra_mode = others[code_truncated_binary(c, idx, static_cast<int>(others.size()))];
        }
        cu.sbt = 0;
        code_residual(c, ctx, cu, fs);
        cu.root_cbf = cu.any_cbf();
        return;
    }
    cu.merge = c.bin(ctx.merge, cu.merge);
    bool root_coded = true;
    if (cu.merge) {
        code_merge_data(c, ctx, cu, fs, *m);
        root_coded = cu.merge_type == MergeType::regular && !cu.mmvd && cu.ciip;
    } else {
        cu.merge_type = MergeType::regular;
        cu.mmvd = cu.ciip = false;
        if (fs.ref_count == 2) {
            if (c.bin(ctx.bi, cu.inter_dir == 2))
                cu.inter_dir = 2;
            else
                cu.inter_dir = static_cast<int>(c.bin(ctx.ref1, cu.inter_dir == 1));
        } else {
            cu.inter_dir = 0;
        }
        cu.imv = fs.tools.has(Tool::imv) ? c.bin(ctx.imv, cu.imv) : false;
        for (int k = 0; k < (cu.inter_dir == 2 ? 2 : 1); ++k) {
            cu.mvd[k].x = detail::code_signed(c, ctx.mvd_nz, cu.mvd[k].x);
            cu.mvd[k].y = detail::code_signed(c, ctx.mvd_nz, cu.mvd[k].y);
        }
        if (cu.inter_dir != 2) cu.mvd[1] = {};
        cu.bcw = kBcwDefault;
        if (cu.inter_dir == 2 && fs.tools.has(Tool::bcw) && c.bin(ctx.bcw, cu.bcw != kBcwDefault)) {
            int v = cu.bcw < kBcwDefault ? cu.bcw : cu.bcw - 1;
            v = detail::code_bypass_value(c, v, 2);
            cu.bcw = v < kBcwDefault ? v : v + 1;
        }
    }
    cu.root_cbf = root_coded ? c.bin(ctx.root_cbf, cu.root_cbf) : true;
    if (!cu.root_cbf) {
        cu.levels.clear();
        cu.sbt = cu.mts = 0;
        return;
    }
    const int sbt_in = cu.sbt;
    cu.sbt = 0;
    if (sbt_allowed(cu, fs.tools) && c.bin(ctx.sbt, sbt_in != 0)) {
        const int idx_in = sbt_in ? (sbt_in - 1) >> 1 : 0, pos_in = sbt_in ? (sbt_in - 1) & 1 : 0;
        int idx = r.w >= 8 ? 0 : 1;
        if (r.w >= 8 && r.h >= 8) idx = static_cast<int>(c.bypass(idx_in == 1));
        const int pos = static_cast<int>(c.bypass(pos_in == 1));
        cu.sbt = 1 + 2 * idx + pos;
    }
    code_residual(c, ctx, cu, fs);
}

// ---------------------------------------------------------------------------
// Coders used around the syntax functions

/// Adapts contexts exactly like the arithmetic coder without producing output.
class ContextUpdater {
public:
    static constexpr bool kReading = false;
    bool bin(Context& c, bool b) {
        c.update(b);
        return b;
    }
    bool bypass(bool b) { return b; }
    std::uint32_t bypass_bits(std::uint32_t v, int) { return v; }
};

/// Wraps a coder and accounts the adaptive model cost of every bin.
template <typename Inner>
class Metered {
public:
    static constexpr bool kReading = Inner::kReading;
    explicit Metered(Inner& inner) : inner_(inner) {}

    bool bin(Context& c, bool b) {
        const Context before = c;
        const bool v = inner_.bin(c, b);
        add(bin_cost(before, v));
        return v;
    }
    bool bypass(bool b) {
        add(1.0);
        return inner_.bypass(b);
    }
    std::uint32_t bypass_bits(std::uint32_t v, int n) {
        add(n);
        return inner_.bypass_bits(v, n);
    }
    void residual_section(bool on) { in_residual_ = on; }
    [[nodiscard]] double bits() const { return bits_; }
    [[nodiscard]] double residual_bits() const { return residual_bits_; }

private:
    void add(double b) {
        bits_ += b;
        if (in_residual_) residual_bits_ += b;
    }
    Inner& inner_;
    double bits_ = 0.0;
    double residual_bits_ = 0.0;
    bool in_residual_ = false;
};

// ---------------------------------------------------------------------------
// Prediction and reconstruction from syntax

inline SamplePlane predict_intra(const FrameState& fs, const Rect& r, int mode, int line) {
    const auto refs = build_intra_refs(fs.recon, [&fs](int x, int y) { return fs.available(x, y); }, r, line);
    return intra_predict(mode, refs);
}

inline SamplePlane inverse_residual(const SamplePlane& levels, const TransformPair& tp, const FrameState& fs) {
    return transform(dequantize(levels, fs.cfg->qp, fs.qmode), tp.h, tp.v, true);
}

/// Adds the decoded residual of one TU to a block whose origin is `origin`.
inline void add_residual(SamplePlane& block, const Rect& origin, const TuShape& t, const SamplePlane& levels, const FrameState& fs) {
    if (!has_nonzero(levels)) return;
    const auto res = inverse_residual(levels, t.types, fs);
    const int ox = t.r.x - origin.x, oy = t.r.y - origin.y;
    for (int y = 0; y < t.r.h; ++y)
        for (int x = 0; x < t.r.w; ++x) block(ox + x, oy + y) = clip_sample(block(ox + x, oy + y) + res(x, y));
}

struct InterPrediction {
    SamplePlane pred;
    std::vector<MotionInfo> units;  // per 4x4, row-major over the CU
};

inline InterPrediction predict_inter(const FrameState& fs, const CuSyntax& cu, const MergeLists& m) {
    const auto& r = cu.r;
    const std::size_t n_units = static_cast<std::size_t>(r.w / 4) * (r.h / 4);
    InterPrediction out;
    if (cu.merge && (cu.merge_type == MergeType::sbtmvp || cu.merge_type == MergeType::affine)) {
        const auto& cand = m.all[m.subblock[cu.merge_idx]];
        out.pred = predict_subblocks(fs.refs, r, cand.sub);
        out.units = cand.sub;
        return out;
    }
    if (cu.merge && cu.merge_type == MergeType::geo) {
        const auto& a = m.all[m.regular[cu.geo_idx0]].motion;
        const auto& b = m.all[m.regular[cu.geo_idx1]].motion;
        out.pred = blend_predictions(predict_motion(fs.refs, r, a), predict_motion(fs.refs, r, b), {BlendKind::geo, cu.geo_split});
        for (int uy = 0; uy < r.h / 4; ++uy)
            for (int ux = 0; ux < r.w / 4; ++ux)
                out.units.push_back(geo_weight(cu.geo_split, 4 * ux + 2, 4 * uy + 2, r.w, r.h) >= 4 ? a : b);
        return out;
    }
    const MotionInfo motion = cu.merge ? merge_motion(cu, m) : explicit_motion(cu, m);
    if (!cu.merge && motion.is_bi() && cu.bcw != kBcwDefault) {
        out.pred = blend_predictions(motion_compensate(*fs.refs[0], r, motion.mv[0]), motion_compensate(*fs.refs[1], r, motion.mv[1]),
                                     {BlendKind::bcw, cu.bcw});
    } else {
        out.pred = predict_motion(fs.refs, r, motion);
    }
    if (cu.ciip) out.pred = blend_predictions(predict_intra(fs, r, kPlanar, 0), out.pred, {BlendKind::ciip, 0});
    out.units.assign(n_units, motion);
    return out;
}

/// Writes the CU's reconstruction into the frame and records its layout
/// and motion. Returns the CU id.
inline int reconstruct_cu(FrameState& fs, const CuSyntax& cu, const MergeLists& m) {
    const auto tus = tu_layout(cu);
    const int id = fs.next_cu_id++;
    const auto& r = cu.r;
    MotionUnit base;
    base.coded = true;
    if (cu.intra) {
        if (cu.isp) {
            for (std::size_t k = 0; k < tus.size(); ++k) {
                auto part = predict_intra(fs, tus[k].r, cu.intra_mode, 0);
                add_residual(part, tus[k].r, tus[k], cu.levels[k], fs);
                fs.recon.paste(part, tus[k].r.x, tus[k].r.y);
                fs.mark(tus[k].r);
            }
        } else {
            auto blk = predict_intra(fs, r, cu.intra_mode, cu.mrl);
            for (std::size_t k = 0; k < tus.size(); ++k) add_residual(blk, r, tus[k], cu.levels[k], fs);
            fs.recon.paste(blk, r.x, r.y);
            fs.mark(r);
        }
        fs.map.assign(r, id, base);
        return id;
    }
    auto ip = predict_inter(fs, cu, m);
    if (cu.root_cbf)
        for (std::size_t k = 0; k < tus.size(); ++k) add_residual(ip.pred, r, tus[k], cu.levels[k], fs);
    fs.recon.paste(ip.pred, r.x, r.y);
    fs.mark(r);
    base.inter = true;
    fs.map.assign(r, id, base);
    const int cols = r.w / 4;
    for (int uy = 0; uy < r.h / 4; ++uy)
        for (int ux = 0; ux < cols; ++ux)
            fs.map.motion.unit((r.x >> 2) + ux, (r.y >> 2) + uy).motion = ip.units[static_cast<std::size_t>(uy) * cols + ux];
    return id;
}

/// Decision record of a reconstructed CU.
inline CuRecord make_record(const FrameState& fs, const CuSyntax& cu) {
    CuRecord rec;
    rec.frame = fs.index;
    rec.x = cu.r.x;
    rec.y = cu.r.y;
    rec.width = cu.r.w;
    rec.height = cu.r.h;
    rec.qt_depth = cu.qt_depth;
    rec.mt_depth = cu.mt_depth;
    rec.depth = cu.qt_depth + cu.mt_depth;
    rec.pred_mode = cu.intra ? PredMode::intra : PredMode::inter;
    if (cu.intra || cu.ciip) {
        rec.intra_mode = cu.intra ? cu.intra_mode : kPlanar;
        rec.mrl_idx = cu.intra ? cu.mrl : 0;
        rec.isp_mode = cu.intra ? cu.isp : 0;
    }
    if (!cu.intra) {
        rec.merge_flag = cu.merge;
        rec.skip_flag = cu.skip;
        if (cu.merge) {
            rec.merge_type = cu.merge_type;
            rec.merge_idx = cu.mmvd ? cu.mmvd_base : cu.merge_type == MergeType::geo ? cu.geo_idx0 : cu.merge_idx;
        }
        rec.mmvd_flag = cu.mmvd;
        rec.imv_flag = !cu.merge && cu.imv;
        rec.ciip_flag = cu.ciip;
        const auto& u = fs.map.motion.at(cu.r.x, cu.r.y);
        rec.mv = u.motion.mv[0];
        const bool translational = !cu.merge || cu.merge_type == MergeType::regular;
        if (translational && u.motion.is_bi()) rec.bcw_idx = cu.merge ? kBcwDefault : cu.bcw;
        if (cu.sbt) {
            rec.sbt_idx = (cu.sbt - 1) >> 1;
            rec.sbt_pos = (cu.sbt - 1) & 1;
        }
    }
    rec.mts_idx = cu.mts;
    rec.cbf_y = cu.any_cbf();
    rec.root_cbf = cu.intra ? rec.cbf_y : cu.root_cbf;
    rec.depquant = fs.qmode == QuantMode::depquant && rec.cbf_y;
    return rec;
}

/// Decides CU syntax for a fresh (not yet coded) frame region and codes it.
/// Split modes of every node in pre-order, CUs in coding order.
struct CodingTree {
    std::vector<SplitMode> splits;
    std::vector<CuSyntax> cus;
};

/// Codes (or parses) one coding tree and reconstructs its CUs. The hook
/// sees every CU after reconstruction together with its bit cost.
template <typename Inner, typename Hook>
void code_tree(Metered<Inner>& c, FrameState& fs, const CodingNode& n, CodingTree& t, std::size_t& si, std::size_t& ci,
               Hook&& hook) {
    constexpr bool reading = Inner::kReading;
    const auto opts = split_options(n, *fs.cfg, fs.width, fs.height);
    SplitMode want = SplitMode::none;
    if constexpr (!reading) want = t.splits[si++];
    const SplitMode mode = code_split(c, fs.ctx, n, opts, want);
    if constexpr (reading) t.splits.push_back(mode);
    if (mode == SplitMode::none) {
        if constexpr (reading) {
            t.cus.emplace_back();
            auto& cu = t.cus.back();
            cu.r = n.r;
            cu.qt_depth = n.qt_depth;
            cu.mt_depth = n.mt_depth;
        }
        auto& cu = t.cus[ci++];
        MergeLists m;
        if (fs.inter) m = merge_lists(fs, cu.r);
        const double b0 = c.bits(), r0 = c.residual_bits();
        code_cu(c, fs.ctx, cu, fs, &m);
        reconstruct_cu(fs, cu, m);
        hook(cu, c.bits() - b0, c.residual_bits() - r0);
        return;
    }
    for (const auto& child : split_children(n, mode, fs.width, fs.height)) code_tree(c, fs, child, t, si, ci, hook);
}

}  // namespace fcm::codec
