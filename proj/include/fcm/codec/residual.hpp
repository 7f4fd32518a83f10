#pragma once

// Quantisation (scalar and 4-state dependent), coefficient syntax and the
// rate model shared by the trellis and the bitstream writer.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <vector>

#include "fcm/codec/entropy.hpp"
#include "fcm/codec/plane.hpp"
#include "fcm/error.hpp"

namespace fcm::codec {

inline double qstep(int qp) { return std::exp2((qp - 4) / 6.0); }

/// Qstep in 1/65536 units; the only form the reconstruction path uses.
inline std::int64_t qstep_fixed(int qp) { return std::llround(qstep(qp) * 65536.0); }

enum class QuantMode : std::uint8_t { scalar, depquant };

/// Dependent-quantisation state machine: next = kDqTransition[state][parity].
inline constexpr int kDqTransition[4][2] = {{0, 2}, {2, 0}, {1, 3}, {3, 1}};

struct ResidualContexts {
    Context sig[4][4][3];
    Context gt1[4][4];
    Context gt2[4];
    Context last_prefix[4][14];
};

inline int size_class(int w, int h) {
    const int a = w * h;
    return a <= 16 ? 0 : a <= 64 ? 1 : a <= 256 ? 2 : 3;
}

inline int freq_region(int x, int y) {
    const int s = x + y;
    return s == 0 ? 0 : s <= 2 ? 1 : s <= 7 ? 2 : 3;
}

struct ScanPos {
    std::uint8_t x;
    std::uint8_t y;
};

/// Diagonal scan, low frequencies first; within an anti-diagonal from
/// bottom-left to top-right.
inline const std::vector<ScanPos>& diag_scan(int w, int h) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::vector<ScanPos>> cache;
    std::lock_guard lock(mu);
    auto& s = cache[{w, h}];
    if (s.empty()) {
        for (int d = 0; d < w + h - 1; ++d)
            for (int y = std::min(d, h - 1); y >= 0; --y) {
                const int x = d - y;
                if (x < w) s.push_back({static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y)});
            }
    }
    return s;
}

/// Reconstructed coefficient for a level under the given quantiser state
/// (state is ignored in scalar mode).
inline std::int32_t dequant_level(int level, std::int64_t qfp, QuantMode mode, int state) {
    if (level == 0) return 0;
    const std::int64_t a = std::abs(level);
    std::int64_t mag;
    if (mode == QuantMode::depquant && state >= 2)
        mag = ((2 * a - 1) * qfp + (1 << 16)) >> 17;
    else
        mag = (a * qfp + (1 << 15)) >> 16;
    return static_cast<std::int32_t>(level < 0 ? -mag : mag);
}

inline SamplePlane dequantize(const SamplePlane& levels, int qp, QuantMode mode) {
    const auto qfp = qstep_fixed(qp);
    const auto& scan = diag_scan(levels.width(), levels.height());
    SamplePlane out(levels.width(), levels.height());
    int last = -1;
    for (int i = 0; i < static_cast<int>(scan.size()); ++i)
        if (levels(scan[i].x, scan[i].y) != 0) last = i;
    int state = 0;
    for (int i = last; i >= 0; --i) {
        const int lv = levels(scan[i].x, scan[i].y);
        out(scan[i].x, scan[i].y) = dequant_level(lv, qfp, mode, state);
        if (mode == QuantMode::depquant) state = kDqTransition[state][std::abs(lv) & 1];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coefficient syntax

namespace detail {
inline int floor_log2(std::uint32_t v) {
    int l = -1;
    while (v) {
        v >>= 1;
        ++l;
    }
    return l;
}
}  // namespace detail

template <typename C>
int code_last_position(C& c, ResidualContexts& ctx, int last, int w, int h) {
    const int n = w * h;
    const int sc = size_class(w, h);
    const int gmax = detail::floor_log2(static_cast<std::uint32_t>(n));
    const int g_in = C::kReading ? 0 : detail::floor_log2(static_cast<std::uint32_t>(last + 1));
    int g = 0;
    while (g < gmax && c.bin(ctx.last_prefix[sc][g], g < g_in)) ++g;
    const auto suffix = c.bypass_bits(static_cast<std::uint32_t>(last + 1 - (1 << g)), g);
    const int v = static_cast<int>((1u << g) + suffix) - 1;
    if (v >= n) throw CorruptionError("last coefficient position out of range");
    return v;
}

/// Codes (or decodes into) a level block; the caller codes the cbf.
/// levels must hold at least one non-zero value when writing.
template <typename C>
void code_levels(C& c, ResidualContexts& ctx, SamplePlane& levels, QuantMode mode) {
    const int w = levels.width(), h = levels.height();
    const auto& scan = diag_scan(w, h);
    const int sc = size_class(w, h);
    int last = 0;
    if constexpr (!C::kReading) {
        for (int i = 0; i < static_cast<int>(scan.size()); ++i)
            if (levels(scan[i].x, scan[i].y) != 0) last = i;
    }
    last = code_last_position(c, ctx, last, w, h);
    int state = 0;
    for (int i = last; i >= 0; --i) {
        const auto p = scan[i];
        const int region = freq_region(p.x, p.y);
        const int level_in = C::kReading ? 0 : levels(p.x, p.y);
        int a = std::abs(level_in);
        bool nz = true;
        if (i != last) {
            const int scls = mode == QuantMode::depquant ? 1 + (state >> 1) : 0;
            nz = c.bin(ctx.sig[sc][region][scls], a > 0);
        }
        int level = 0;
        if (nz) {
            int mag = 1;
            if (c.bin(ctx.gt1[sc][region], a > 1)) {
                mag = 2;
                if (c.bin(ctx.gt2[region], a > 2)) {
                    const auto rem = code_exp_golomb(c, static_cast<std::uint32_t>(a > 2 ? a - 3 : 0));
                    if (rem > (1u << 20)) throw CorruptionError("coefficient level out of range");
                    mag = 3 + static_cast<int>(rem);
                }
            }
            const bool neg = c.bypass(level_in < 0);
            level = neg ? -mag : mag;
        }
        if constexpr (C::kReading) levels(p.x, p.y) = level;
        if (mode == QuantMode::depquant) state = kDqTransition[state][std::abs(level) & 1];
    }
    if constexpr (C::kReading) {
        for (int i = last + 1; i < static_cast<int>(scan.size()); ++i) levels(scan[i].x, scan[i].y) = 0;
    }
}

// ---------------------------------------------------------------------------
// Quantisers

struct QuantResult {
    SamplePlane levels;
    double distortion = 0.0;  // coefficient-domain squared error
    double rate_bits = 0.0;   // coefficients + cbf under the frozen model
    bool nonzero = false;
    [[nodiscard]] double cost(double lambda) const { return distortion + lambda * rate_bits; }
};

/// Frozen-context prices used by both quantisers.
class LevelRateModel {
public:
    LevelRateModel(const ResidualContexts& ctx, int w, int h, double cbf0_bits, double cbf1_bits)
        : ctx_(ctx), w_(w), h_(h), sc_(size_class(w, h)), cbf0_(cbf0_bits), cbf1_(cbf1_bits) {
        const int n = w * h;
        last_bits_.resize(n);
        const int gmax = detail::floor_log2(static_cast<std::uint32_t>(n));
        for (int v = 0; v < n; ++v) {
            const int g = detail::floor_log2(static_cast<std::uint32_t>(v + 1));
            double b = g;  // suffix
            for (int i = 0; i < g; ++i) b += bin_cost(ctx.last_prefix[sc_][i], true);
            if (g < gmax) b += bin_cost(ctx.last_prefix[sc_][g], false);
            last_bits_[v] = b;
        }
    }

    [[nodiscard]] double sig_bits(int region, int state_class, bool nz) const {
        return bin_cost(ctx_.sig[sc_][region][state_class], nz);
    }
    /// Bits for a non-zero magnitude after significance (gt flags, remainder, sign).
    [[nodiscard]] double magnitude_bits(int region, int a) const {
        double b = 1.0 + bin_cost(ctx_.gt1[sc_][region], a > 1);
        if (a > 1) {
            b += bin_cost(ctx_.gt2[region], a > 2);
            if (a > 2) b += 2 * detail::floor_log2(static_cast<std::uint32_t>(a - 2)) + 1;
        }
        return b;
    }
    [[nodiscard]] double last_bits(int scan_idx) const { return last_bits_[scan_idx]; }
    [[nodiscard]] double cbf_bits(bool nz) const { return nz ? cbf1_ : cbf0_; }
    [[nodiscard]] int width() const { return w_; }
    [[nodiscard]] int height() const { return h_; }

    /// Exact model rate of a level block (including cbf).
    [[nodiscard]] double block_bits(const SamplePlane& levels, QuantMode mode) const {
        const auto& scan = diag_scan(w_, h_);
        int last = -1;
        for (int i = 0; i < static_cast<int>(scan.size()); ++i)
            if (levels(scan[i].x, scan[i].y) != 0) last = i;
        if (last < 0) return cbf_bits(false);
        double b = cbf_bits(true) + last_bits(last);
        int state = 0;
        for (int i = last; i >= 0; --i) {
            const auto p = scan[i];
            const int region = freq_region(p.x, p.y);
            const int a = std::abs(levels(p.x, p.y));
            if (i != last) b += sig_bits(region, mode == QuantMode::depquant ? 1 + (state >> 1) : 0, a > 0);
            if (a > 0) b += magnitude_bits(region, a);
            if (mode == QuantMode::depquant) state = kDqTransition[state][a & 1];
        }
        return b;
    }

private:
    const ResidualContexts& ctx_;
    int w_, h_, sc_;
    double cbf0_, cbf1_;
    std::vector<double> last_bits_;
};

/// Coefficient-domain distortion of a level block under a quantiser.
inline double level_distortion(const SamplePlane& coeffs, const SamplePlane& levels, int qp, QuantMode mode) {
    const auto rec = dequantize(levels, qp, mode);
    double d = 0.0;
    for (std::size_t i = 0; i < coeffs.data().size(); ++i) {
        const double e = static_cast<double>(coeffs.data()[i]) - rec.data()[i];
        d += e * e;
    }
    return d;
}

/// level = sign(c) * floor(|c| / Qstep + 0.4)
inline SamplePlane scalar_levels(const SamplePlane& coeffs, int qp) {
    const double inv = 1.0 / qstep(qp);
    SamplePlane out(coeffs.width(), coeffs.height());
    for (std::size_t i = 0; i < coeffs.data().size(); ++i) {
        const int c = coeffs.data()[i];
        const int a = static_cast<int>(std::floor(std::abs(c) * inv + 0.4));
        out.data()[i] = c < 0 ? -a : a;
    }
    return out;
}

inline QuantResult quantize_scalar(const SamplePlane& coeffs, int qp, const LevelRateModel& model) {
    QuantResult r;
    r.levels = scalar_levels(coeffs, qp);
    r.nonzero = std::any_of(r.levels.data().begin(), r.levels.data().end(), [](int v) { return v != 0; });
    r.distortion = level_distortion(coeffs, r.levels, qp, QuantMode::scalar);
    r.rate_bits = model.block_bits(r.levels, QuantMode::scalar);
    return r;
}

/// 4-state trellis over the reverse scan, minimising D + lambda * R under
/// the model. Candidate magnitudes per coefficient span round(|c|/Qstep)
/// +-2 plus zero; the extra "not started" state prices the last position.
inline QuantResult quantize_depquant(const SamplePlane& coeffs, int qp, double lambda, const LevelRateModel& model) {
    const int w = coeffs.width(), h = coeffs.height();
    const auto& scan = diag_scan(w, h);
    const int n = static_cast<int>(scan.size());
    const auto qfp = qstep_fixed(qp);
    const double inv = 1.0 / qstep(qp);
    constexpr double kInf = std::numeric_limits<double>::infinity();
    constexpr int kNotStarted = 4;

    struct Step {
        std::int8_t prev;
        std::int32_t level;
    };
    std::vector<std::array<Step, 5>> trace(n);
    std::array<double, 5> cost{kInf, kInf, kInf, kInf, 0.0};

    for (int i = n - 1; i >= 0; --i) {
        const auto p = scan[i];
        const int c = coeffs(p.x, p.y);
        const int region = freq_region(p.x, p.y);
        const int sign = c < 0 ? -1 : 1;
        const int a0 = static_cast<int>(std::lround(std::abs(c) * inv));
        const double d0 = static_cast<double>(c) * c;
        std::array<double, 5> next{kInf, kInf, kInf, kInf, kInf};
        std::array<Step, 5> step{};

        // remain not started: coefficient is zero and uncoded
        next[kNotStarted] = cost[kNotStarted] + d0;
        step[kNotStarted] = {kNotStarted, 0};

        auto relax = [&](int from, int level, double add) {
            const int to = from == kNotStarted ? kDqTransition[0][std::abs(level) & 1]
                                               : kDqTransition[from][std::abs(level) & 1];
            const double v = cost[from] + add;
            if (v < next[to]) {
                next[to] = v;
                step[to] = {static_cast<std::int8_t>(from), level};
            }
        };

        for (int s = 0; s < 4; ++s) {
            if (cost[s] == kInf) continue;
            const int scls = 1 + (s >> 1);
            relax(s, 0, d0 + lambda * model.sig_bits(region, scls, false));
        }
        for (int a = std::max(1, a0 - 2); a <= a0 + 2; ++a) {
            const int level = sign * a;
            const double mag_bits = model.magnitude_bits(region, a);
            for (int s = 0; s < 4; ++s) {
                if (cost[s] == kInf) continue;
                const double e = c - dequant_level(level, qfp, QuantMode::depquant, s);
                relax(s, level, e * e + lambda * (model.sig_bits(region, 1 + (s >> 1), true) + mag_bits));
            }
            // start here as the last significant coefficient (state 0)
            const double e = c - dequant_level(level, qfp, QuantMode::depquant, 0);
            relax(kNotStarted, level, e * e + lambda * (model.last_bits(i) + mag_bits));
        }
        trace[i] = step;
        cost = next;
    }

    QuantResult r;
    r.levels = SamplePlane(w, h);
    int best = kNotStarted;
    double best_cost = cost[kNotStarted] + lambda * model.cbf_bits(false);
    for (int s = 0; s < 4; ++s) {
        const double v = cost[s] + lambda * model.cbf_bits(true);
        if (v < best_cost) {
            best_cost = v;
            best = s;
        }
    }
    int s = best;
    for (int i = 0; i < n; ++i) {
        const auto& st = trace[i][s];
        r.levels(scan[i].x, scan[i].y) = st.level;
        s = st.prev;
    }
    r.nonzero = best != kNotStarted;
    r.distortion = level_distortion(coeffs, r.levels, qp, QuantMode::depquant);
    r.rate_bits = model.block_bits(r.levels, QuantMode::depquant);
    return r;
}

inline QuantResult quantize(const SamplePlane& coeffs, int qp, double lambda, QuantMode mode,
                            const LevelRateModel& model) {
    return mode == QuantMode::depquant ? quantize_depquant(coeffs, qp, lambda, model)
                                       : quantize_scalar(coeffs, qp, model);
}

}  // namespace fcm::codec
