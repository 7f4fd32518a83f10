#pragma once

// Rate-distortion optimised mode and partition search for one frame.

#include <algorithm>
#include <functional>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <utility>
#include <vector>

#include "fcm/codec/syntax.hpp"

namespace fcm::codec {

namespace detail {

inline std::int64_t sad(const SamplePlane& a, const SamplePlane& b) {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < a.data().size(); ++i) s += std::abs(a.data()[i] - b.data()[i]);
    return s;
}

/// Integer search in a small window around `center`, then half-sample
/// refinement. Positions stay within +-range and inside the reference.
inline SearchResult refine_search(const SamplePlane& cur, int bx, int by, const SamplePlane& ref, MotionVector center,
                                  int radius, int range) {
    const int w = cur.width(), h = cur.height();
    const int cx = center.x >> 2, cy = center.y >> 2;
    SearchResult best;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
            const int x = cx + dx, y = cy + dy;
            if (std::abs(x) > range || std::abs(y) > range) continue;
            if (bx + x < 0 || by + y < 0 || bx + x + w > ref.width() || by + y + h > ref.height()) continue;
            const auto s = sad_int(cur, ref, bx + x, by + y, best.sad);
            const MotionVector v{4 * x, 4 * y};
            if (s < best.sad || (s == best.sad && mv_precedes(v, best.mv))) best = {v, s};
        }
    if (best.sad == std::numeric_limits<std::int64_t>::max()) {
        best.mv = {};
        best.sad = sad(cur, motion_compensate(ref, {bx, by, w, h}, {}));
        return best;
    }
    const MotionVector base = best.mv;
    for (int dy = -2; dy <= 2; dy += 2)
        for (int dx = -2; dx <= 2; dx += 2) {
            if (!dx && !dy) continue;
            const MotionVector v{base.x + dx, base.y + dy};
            if (std::abs(v.x) > 4 * range || std::abs(v.y) > 4 * range) continue;
            if (bx + (v.x >> 2) < 0 || by + (v.y >> 2) < 0) continue;
            if (bx + ((v.x + 3) >> 2) + w > ref.width() || by + ((v.y + 3) >> 2) + h > ref.height()) continue;
            const auto s = sad(cur, motion_compensate(ref, {bx, by, w, h}, v));
            if (s < best.sad || (s == best.sad && mv_precedes(v, best.mv))) best = {v, s};
        }
    return best;
}

}  // namespace detail

/// Best motion per reference found at the nearest quad-tree ancestor;
/// multi-type tree nodes refine around it instead of searching afresh.
struct MotionHint {
    bool valid = false;
    std::array<MotionVector, 2> mv{};
};

class FrameEncoder {
public:
    FrameEncoder(FrameState& fs, const SamplePlane& src)
        : fs_(fs), src_(src), lambda_(rd_lambda(fs.cfg->qp)), sqrt_lambda_(std::sqrt(lambda_)) {}

    /// Chooses the coding tree of one CTU. Frame state is unchanged on return.
    CodingTree search_ctu(const Rect& ctu) {
        double cost = 0;
        return search_ctu(ctu, cost);
    }
    CodingTree search_ctu(const Rect& ctu, double& cost) {
        CodingTree t;
        cost = search_node({ctu, 0, 0}, t, {});
        return t;
    }

    /// Picks a split mode for a node; must return an allowed mode.
    using SplitChooser = std::function<SplitMode(const CodingNode&, const SplitOptions&)>;

    /// Cost of the tree whose shape `choose` dictates, with modes decided
    /// exactly as in the search.
    double evaluate_ctu(const Rect& ctu, const SplitChooser& choose, CodingTree& out) {
        force_ = &choose;
        const double j = search_node({ctu, 0, 0}, out, {});
        force_ = nullptr;
        return j;
    }

    [[nodiscard]] double lambda() const { return lambda_; }

private:
    struct Candidate {
        CuSyntax cu;
        double cost = std::numeric_limits<double>::infinity();
        std::int64_t sse = 0;
    };

    FrameState& fs_;
    const SamplePlane& src_;
    double lambda_;
    double sqrt_lambda_;
    const SplitChooser* force_ = nullptr;

    static constexpr int kMttRefineRadius = 2;

    // ---- partition search ---------------------------------------------

    double search_node(const CodingNode& n, CodingTree& out, const MotionHint& hint) {
        const auto opts = split_options(n, *fs_.cfg, fs_.width, fs_.height);
        const SyntaxContexts ctx0 = fs_.ctx;
        double best = std::numeric_limits<double>::infinity();
        MotionHint child_hint = hint;
        if (!opts.forced_qt) {
            RateEstimator re;
            code_split(re, fs_.ctx, n, opts, SplitMode::none);
            auto c = decide_cu(n, hint, child_hint);
            best = c.cost + lambda_ * re.bits();
            const bool settled = c.sse == 0 || (!c.cu.intra && !c.cu.root_cbf);
            out.splits.assign(1, SplitMode::none);
            out.cus.clear();
            out.cus.push_back(std::move(c.cu));
            if (settled && !force_) return best;
        }
        const double none_cost = best;
        std::array<double, 6> split_cost;
        split_cost.fill(std::numeric_limits<double>::infinity());
        const SplitMode forced = force_ ? (*force_)(n, opts) : SplitMode::none;
        if (force_) {
            if (forced == SplitMode::none) return best;
            best = std::numeric_limits<double>::infinity();
        }
        for (int mi = 1; mi < 6; ++mi) {
            if (!opts.allowed[mi]) continue;
            const auto mode = static_cast<SplitMode>(mi);
            if (force_ && mode != forced) continue;
            // a ternary split is only tried when the binary split in the same
            // direction improved on not splitting
            if (!force_ && mode == SplitMode::th && opts.allowed[2] && !(split_cost[2] < none_cost)) continue;
            if (!force_ && mode == SplitMode::tv && opts.allowed[3] && !(split_cost[3] < none_cost)) continue;
            fs_.ctx = ctx0;
            RateEstimator re;
            code_split(re, fs_.ctx, n, opts, mode);
            double j = lambda_ * re.bits();
            ContextUpdater up;
            code_split(up, fs_.ctx, n, opts, mode);
            CodingTree t;
            t.splits.push_back(mode);
            const auto children = split_children(n, mode, fs_.width, fs_.height);
            for (std::size_t k = 0; k < children.size() && j < best; ++k) {
                CodingTree sub;
                j += search_node(children[k], sub, child_hint);
                if (j >= best) break;
                if (k + 1 < children.size()) commit(children[k], sub);
                t.splits.insert(t.splits.end(), sub.splits.begin(), sub.splits.end());
                for (auto& cu : sub.cus) t.cus.push_back(std::move(cu));
            }
            fs_.clear(n.r);
            split_cost[mi] = j;
            if (j < best) {
                best = j;
                out = std::move(t);
            }
        }
        fs_.ctx = ctx0;
        return best;
    }

    /// Codes and reconstructs a chosen subtree so later siblings see it.
    void commit(const CodingNode& n, CodingTree& t) {
        ContextUpdater up;
        Metered<ContextUpdater> m(up);
        std::size_t si = 0, ci = 0;
        code_tree(m, fs_, n, t, si, ci, [](const CuSyntax&, double, double) {});
    }

    // ---- mode decision ------------------------------------------------

    Candidate decide_cu(const CodingNode& n, const MotionHint& hint, MotionHint& found) {
        CuSyntax base;
        base.r = n.r;
        base.qt_depth = n.qt_depth;
        base.mt_depth = n.mt_depth;
        const SamplePlane org = src_.crop(n.r);
        Candidate best = search_intra(base, org);
        if (fs_.inter) {
            auto c = search_inter(base, org, n, hint, found);
            if (c.cost < best.cost) best = std::move(c);
        }
        return best;
    }

    double cu_bits(CuSyntax& cu, const MergeLists* m) {
        RateEstimator re;
        code_cu(re, fs_.ctx, cu, fs_, m);
        return re.bits();
    }

    /// Levels of one transform unit. Blocks whose coefficients all lie
    /// below a quarter step quantise to zero without running the trellis:
    /// no level reconstructs closer than Qstep/2 to them.
    SamplePlane quantize_tu(const SamplePlane& res, const TuShape& t, const Context& cbf_ctx) {
        const auto coeffs = transform(res, t.types.h, t.types.v, false);
        const double quarter = 0.25 * qstep(fs_.cfg->qp);
        if (std::all_of(coeffs.data().begin(), coeffs.data().end(), [quarter](int c) { return std::abs(c) < quarter; }))
            return SamplePlane(t.r.w, t.r.h);
        const LevelRateModel model(fs_.ctx.res, t.r.w, t.r.h, bin_cost(cbf_ctx, false), bin_cost(cbf_ctx, true));
        return quantize(coeffs, fs_.cfg->qp, lambda_, fs_.qmode, model).levels;
    }

    /// Quantises the residual of every transform unit against `pred`,
    /// filling cu.levels; returns the reconstruction.
    SamplePlane residualize(CuSyntax& cu, const SamplePlane& org, SamplePlane pred) {
        cu.levels.clear();
        const auto& cbf_ctx = fs_.ctx.cbf[cu.intra ? 0 : 1];
        for (const auto& t : tu_layout(cu)) {
            const int ox = t.r.x - cu.r.x, oy = t.r.y - cu.r.y;
            SamplePlane res(t.r.w, t.r.h);
            for (int y = 0; y < t.r.h; ++y)
                for (int x = 0; x < t.r.w; ++x) res(x, y) = org(ox + x, oy + y) - pred(ox + x, oy + y);
            auto levels = quantize_tu(res, t, cbf_ctx);
            add_residual(pred, cu.r, t, levels, fs_);
            cu.levels.push_back(std::move(levels));
        }
        return pred;
    }

    Candidate finish(CuSyntax cu, std::int64_t sse, const MergeLists* m) {
        Candidate c;
        c.sse = sse;
        c.cost = static_cast<double>(sse) + lambda_ * cu_bits(cu, m);
        c.cu = std::move(cu);
        return c;
    }

    // ---- intra --------------------------------------------------------

    double intra_mode_bits(int mode, int line, const std::vector<int>& angular) const {
        const auto& ctx = fs_.ctx;
        double b = 0.0;
        if (fs_.tools.has(Tool::mrl)) b += bin_cost(ctx.mrl, line > 0) + (line > 0 ? 1.0 : 0.0);
        if (mode == kPlanar) return b + bin_cost(ctx.planar, true);
        b += bin_cost(ctx.planar, false);
        if (angular.empty()) return b;
        if (mode == kDc) return b + bin_cost(ctx.dc, true);
        return b + bin_cost(ctx.dc, false) + std::log2(static_cast<double>(angular.size()));
    }

    Candidate evaluate_intra(CuSyntax cu, const SamplePlane& org) {
        if (cu.isp) {
            // partitions predict from the reconstruction of the previous one
            const auto tus = tu_layout(cu);
            const auto& cbf_ctx = fs_.ctx.cbf[0];
            cu.levels.clear();
            std::int64_t total = 0;
            for (const auto& t : tus) {
                auto pred = predict_intra(fs_, t.r, cu.intra_mode, 0);
                const SamplePlane part_org = src_.crop(t.r);
                SamplePlane res(t.r.w, t.r.h);
                for (std::size_t i = 0; i < res.data().size(); ++i) res.data()[i] = part_org.data()[i] - pred.data()[i];
                auto levels = quantize_tu(res, t, cbf_ctx);
                add_residual(pred, t.r, t, levels, fs_);
                total += sse(pred, part_org);
                fs_.recon.paste(pred, t.r.x, t.r.y);
                fs_.mark(t.r);
                cu.levels.push_back(std::move(levels));
            }
            fs_.clear(cu.r);
            return finish(std::move(cu), total, nullptr);
        }
        const auto rec = residualize(cu, org, predict_intra(fs_, cu.r, cu.intra_mode, cu.mrl));
        return finish(std::move(cu), sse(rec, org), nullptr);
    }

    Candidate search_intra(CuSyntax base, const SamplePlane& org) {
        base.intra = true;
        const auto& allowed = fs_.cfg->allowed_intra_modes;
        const auto angular = angular_modes(allowed);
        const auto avail = [this](int x, int y) { return fs_.available(x, y); };
        const int lines = fs_.tools.has(Tool::mrl) ? 3 : 1;
        std::vector<IntraRefs> refs;
        for (int l = 0; l < lines; ++l) refs.push_back(build_intra_refs(fs_.recon, avail, base.r, l));

        struct Rough {
            double cost;
            int mode;
            int line;
        };
        std::vector<Rough> rough;
        auto probe = [&](int mode, int line) {
            for (const auto& r : rough)
                if (r.mode == mode && r.line == line) return;
            const auto pred = intra_predict(mode, refs[line]);
            rough.push_back({static_cast<double>(detail::sad(pred, org)) + sqrt_lambda_ * intra_mode_bits(mode, line, angular), mode, line});
        };
        auto by_cost = [](const Rough& a, const Rough& b) {
            if (a.cost != b.cost) return a.cost < b.cost;
            if (a.line != b.line) return a.line < b.line;
            return a.mode < b.mode;
        };
        // coarse pass over every fourth direction, then neighbours of the best two
        probe(kPlanar, 0);
        probe(kDc, 0);
        const bool coarse = angular.size() > 8;
        for (int m : angular)
            if (!coarse || (m - 2) % 4 == 0) probe(m, 0);
        if (coarse) {
            std::vector<Rough> top = rough;
            std::sort(top.begin(), top.end(), by_cost);
            for (std::size_t i = 0; i < top.size() && i < 2; ++i) {
                if (top[i].mode < 2) continue;
                for (int d = -3; d <= 3; ++d)
                    if (allowed.contains(top[i].mode + d) && top[i].mode + d >= 2) probe(top[i].mode + d, 0);
            }
        }
        std::sort(rough.begin(), rough.end(), by_cost);
        if (lines > 1) {
            const int m0 = rough[0].mode, m1 = rough.size() > 1 ? rough[1].mode : m0;
            for (int l = 1; l < lines; ++l) {
                probe(m0, l);
                probe(m1, l);
            }
            std::sort(rough.begin(), rough.end(), by_cost);
        }

        Candidate best;
        bool planar_done = false;
        for (std::size_t i = 0; i < rough.size() && i < 2; ++i) {
            CuSyntax cu = base;
            cu.intra_mode = rough[i].mode;
            cu.mrl = rough[i].line;
            planar_done |= cu.intra_mode == kPlanar && cu.mrl == 0;
            auto c = evaluate_intra(std::move(cu), org);
            if (c.cost < best.cost) best = std::move(c);
        }
        if (!planar_done) {
            CuSyntax cu = base;
            cu.intra_mode = kPlanar;
            auto c = evaluate_intra(std::move(cu), org);
            if (c.cost < best.cost) best = std::move(c);
        }
        if (best.cu.any_cbf() && mts_allowed(best.cu, fs_.tools)) {
            const CuSyntax start = best.cu;
            for (int k = 1; k <= 4; ++k) {
                CuSyntax cu = start;
                cu.mts = k;
                auto c = evaluate_intra(std::move(cu), org);
                if (c.cost < best.cost && c.cu.mts == k) best = std::move(c);
            }
        }
        CuSyntax isp_base = base;
        isp_base.intra_mode = best.cu.intra_mode;
        if (isp_allowed(isp_base, fs_.tools)) {
            for (int d = 1; d <= 2; ++d) {
                CuSyntax cu = isp_base;
                cu.isp = d;
                auto c = evaluate_intra(std::move(cu), org);
                if (c.cost < best.cost) best = std::move(c);
            }
        }
        return best;
    }

    // ---- inter --------------------------------------------------------

    /// A merge or explicit choice whose residual is still to be decided.
    struct InterTry {
        CuSyntax cu;
        SamplePlane pred;
        double skip_cost = std::numeric_limits<double>::infinity();
    };

    /// Residual coding for an inter candidate. Returns an infinite cost
    /// when the syntax cannot carry the outcome (an all-zero residual in a
    /// merge mode whose root cbf is inferred).
    Candidate evaluate_residual(CuSyntax cu, const SamplePlane& org, const SamplePlane& pred, const MergeLists& m) {
        cu.skip = false;
        const auto rec = residualize(cu, org, pred);
        const bool root_coded = !cu.merge || (cu.merge_type == MergeType::regular && !cu.mmvd && cu.ciip);
        if (!cu.any_cbf()) {
            if (!root_coded) return {};
            cu.root_cbf = false;
            cu.levels.clear();
            cu.sbt = cu.mts = 0;
            return finish(std::move(cu), sse(pred, org), &m);
        }
        cu.root_cbf = true;
        return finish(std::move(cu), sse(rec, org), &m);
    }

    Candidate evaluate_skip(CuSyntax cu, const SamplePlane& org, const SamplePlane& pred, const MergeLists& m) {
        cu.skip = true;
        cu.ciip = false;
        cu.root_cbf = false;
        cu.levels.clear();
        return finish(std::move(cu), sse(pred, org), &m);
    }

    MotionInfo search_motion(const CuSyntax& base, const SamplePlane& org, const CodingNode& n, const MotionHint& hint,
                             MotionHint& found, std::array<std::int64_t, 2>& sads) {
        const int range = fs_.cfg->search_range;
        for (int k = 0; k < fs_.ref_count; ++k) {
            SearchResult r;
            if (n.mt_depth == 0 || !hint.valid)
                r = motion_search(org, base.r.x, base.r.y, *fs_.refs[k], {}, range, true);
            else
                r = detail::refine_search(org, base.r.x, base.r.y, *fs_.refs[k], hint.mv[k], kMttRefineRadius, range);
            found.mv[k] = r.mv;
            sads[k] = r.sad;
        }
        found.valid = true;
        return {};
    }

    Candidate search_inter(const CuSyntax& base_in, const SamplePlane& org, const CodingNode& n, const MotionHint& hint,
                           MotionHint& found) {
        CuSyntax base = base_in;
        base.intra = false;
        const auto& r = base.r;
        const MergeLists m = merge_lists(fs_, r);
        Candidate best;
        auto keep = [&best](Candidate c) {
            if (c.cost < best.cost) best = std::move(c);
        };

        // merge candidates, priced as skip
        std::vector<InterTry> tries;
        std::vector<SamplePlane> regular_pred;
        for (std::size_t i = 0; i < m.regular.size(); ++i) {
            InterTry t;
            t.cu = base;
            t.cu.merge = true;
            t.cu.merge_idx = static_cast<int>(i);
            t.pred = predict_inter(fs_, t.cu, m).pred;
            regular_pred.push_back(t.pred);
            tries.push_back(std::move(t));
        }
        for (int b = 0; b < m.bases; ++b)
            for (int s = 0; s < 4; ++s)
                for (int d = 0; d < 4; ++d) {
                    InterTry t;
                    t.cu = base;
                    t.cu.merge = true;
                    t.cu.mmvd = true;
                    t.cu.mmvd_base = b;
                    t.cu.mmvd_step = s;
                    t.cu.mmvd_dir = d;
                    t.pred = predict_inter(fs_, t.cu, m).pred;
                    tries.push_back(std::move(t));
                }
        if (subblock_merge_ok(m, r))
            for (std::size_t i = 0; i < m.subblock.size(); ++i) {
                InterTry t;
                t.cu = base;
                t.cu.merge = true;
                t.cu.merge_idx = static_cast<int>(i);
                t.cu.merge_type = m.all[m.subblock[i]].kind == CandidateKind::sbtmvp ? MergeType::sbtmvp : MergeType::affine;
                t.pred = predict_inter(fs_, t.cu, m).pred;
                tries.push_back(std::move(t));
            }
        if (geo_ok(fs_, m, r)) {
            // cheapest blend by SSE over all ordered pairs and both splits
            std::int64_t geo_best = std::numeric_limits<std::int64_t>::max();
            CuSyntax g = base;
            SamplePlane g_pred;
            const int nr = static_cast<int>(m.regular.size());
            for (int split = 0; split < 2; ++split)
                for (int i = 0; i < nr; ++i)
                    for (int j = 0; j < nr; ++j) {
                        if (i == j) continue;
                        auto p = blend_predictions(regular_pred[i], regular_pred[j], {BlendKind::geo, split});
                        const auto e = sse(p, org);
                        if (e < geo_best) {
                            geo_best = e;
                            g.geo_split = split;
                            g.geo_idx0 = i;
                            g.geo_idx1 = j;
                            g_pred = std::move(p);
                        }
                    }
            g.merge = true;
            g.merge_type = MergeType::geo;
            tries.push_back({g, std::move(g_pred)});
        }
        for (auto& t : tries) {
            auto c = evaluate_skip(t.cu, org, t.pred, m);
            t.skip_cost = c.cost;
            keep(std::move(c));
        }

        // residual coding for the two best merge candidates
        std::vector<std::size_t> order(tries.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return tries[a].skip_cost < tries[b].skip_cost; });
        Candidate best_residual;
        auto keep_residual = [&](Candidate c) {
            if (c.cost < best_residual.cost) best_residual = std::move(c);
        };
        for (std::size_t k = 0; k < order.size() && k < 2; ++k) {
            const auto& t = tries[order[k]];
            keep_residual(evaluate_residual(t.cu, org, t.pred, m));
        }

        // CIIP on the best regular candidate
        if (ciip_ok(fs_, r, false)) {
            std::size_t arg = 0;
            for (std::size_t i = 1; i < m.regular.size(); ++i)
                if (tries[i].skip_cost < tries[arg].skip_cost) arg = i;
            CuSyntax cu = tries[arg].cu;
            cu.ciip = true;
            const auto pred = blend_predictions(predict_intra(fs_, r, kPlanar, 0), tries[arg].pred, {BlendKind::ciip, 0});
            keep_residual(evaluate_residual(std::move(cu), org, pred, m));
        }

        // explicit motion
        std::array<std::int64_t, 2> sads{};
        search_motion(base, org, n, hint, found, sads);
        const MotionVector mvp = motion_predictor(m, false);
        auto mvd_of = [](MotionVector mv, MotionVector p, int unit) { return MotionVector{(mv.x - p.x) / unit, (mv.y - p.y) / unit}; };
        std::vector<std::pair<CuSyntax, SamplePlane>> explicit_tries;
        for (int k = 0; k < fs_.ref_count; ++k) {
            CuSyntax cu = base;
            cu.inter_dir = k;
            cu.mvd[0] = mvd_of(found.mv[k], mvp, 2);
            auto pred = predict_inter(fs_, cu, m).pred;
            explicit_tries.emplace_back(std::move(cu), std::move(pred));
        }
        if (fs_.ref_count == 2) {
            CuSyntax cu = base;
            cu.inter_dir = 2;
            cu.mvd[0] = mvd_of(found.mv[0], mvp, 2);
            cu.mvd[1] = mvd_of(found.mv[1], mvp, 2);
            auto pred = predict_inter(fs_, cu, m).pred;
            explicit_tries.emplace_back(cu, std::move(pred));
            if (fs_.tools.has(Tool::bcw)) {
                int arg = -1;
                std::int64_t best_sad = std::numeric_limits<std::int64_t>::max();
                SamplePlane arg_pred;
                for (int w = 0; w < 5; ++w) {
                    if (w == kBcwDefault) continue;
                    cu.bcw = w;
                    auto p = predict_inter(fs_, cu, m).pred;
                    const auto s = detail::sad(p, org);
                    if (s < best_sad) {
                        best_sad = s;
                        arg = w;
                        arg_pred = std::move(p);
                    }
                }
                cu.bcw = arg;
                explicit_tries.emplace_back(cu, std::move(arg_pred));
            }
        }
        Candidate best_explicit;
        for (auto& [cu, pred] : explicit_tries) {
            auto c = evaluate_residual(cu, org, pred, m);
            if (c.cost < best_explicit.cost) best_explicit = std::move(c);
        }
        if (fs_.tools.has(Tool::imv) && std::isfinite(best_explicit.cost)) {
            CuSyntax cu = best_explicit.cu;
            const MotionInfo mo = explicit_motion(cu, m);
            const MotionVector p = motion_predictor(m, true);
            auto round4 = [](int v) { return static_cast<int>(std::lround(v / 4.0)); };
            cu.imv = true;
            for (int k = 0; k < (cu.inter_dir == 2 ? 2 : 1); ++k) cu.mvd[k] = {round4(mo.mv[k].x - p.x), round4(mo.mv[k].y - p.y)};
            cu.levels.clear();
            cu.sbt = cu.mts = 0;
            const auto pred = predict_inter(fs_, cu, m).pred;
            auto c = evaluate_residual(std::move(cu), org, pred, m);
            if (c.cost < best_explicit.cost) best_explicit = std::move(c);
        }
        if (best_explicit.cost < best_residual.cost) best_residual = std::move(best_explicit);

        // transform tools for the best candidate that carries a residual
        if (std::isfinite(best_residual.cost) && best_residual.cu.root_cbf) {
            const CuSyntax start = best_residual.cu;
            const auto pred = predict_inter(fs_, start, m).pred;
            if (mts_allowed(start, fs_.tools))
                for (int k = 1; k <= 4; ++k) {
                    CuSyntax cu = start;
                    cu.mts = k;
                    auto c = evaluate_residual(std::move(cu), org, pred, m);
                    if (c.cost < best_residual.cost && c.cu.mts == k) best_residual = std::move(c);
                }
            if (sbt_allowed(start, fs_.tools))
                for (int idx = 0; idx < 2; ++idx) {
                    if ((idx == 0 && r.w < 8) || (idx == 1 && r.h < 8)) continue;
                    for (int pos = 0; pos < 2; ++pos) {
                        CuSyntax cu = start;
                        cu.mts = 0;
                        cu.sbt = 1 + 2 * idx + pos;
                        auto c = evaluate_residual(std::move(cu), org, pred, m);
                        if (c.cost < best_residual.cost) best_residual = std::move(c);
                    }
                }
        }
        keep(std::move(best_residual));
        return best;
    }
};

}  // namespace fcm::codec
