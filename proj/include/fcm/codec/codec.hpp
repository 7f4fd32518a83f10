#pragma once

// Sequence encode/decode and the FCB container.
//
// Container: "FCB1" | version u16 | digest u64 | qp u8 | frames u32 |
// height u32 | width u32 | config | active tools u16 | payload length u32 |
// payload. The digest covers every header field after it, so a flipped qp
// or tool bit is reported as corruption rather than decoded into garbage.
// The payload is one range-coded stream: per frame, the CTUs in raster
// order followed by one SAO parameter set per CTU when SAO is active.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <span>
#include <vector>

#include "fcm/binary_io.hpp"
#include "fcm/codec/encoder.hpp"
#include "fcm/digest.hpp"
#include "fcm/packer.hpp"

namespace fcm::codec {

inline constexpr char kFcbMagic[4] = {'F', 'C', 'B', '1'};
inline constexpr std::uint16_t kFcbVersion = 1;

struct EncoderOptions {
    /// Also code the sequence with every tool off and keep whichever has
    /// the lower cost, so adding tools never makes a sequence worse.
    bool tool_fallback = true;
};

struct EncodeResult {
    std::vector<std::uint8_t> bitstream;
    CuRecordSet records;
    PackedVideo reconstruction;
    ToolSet active;            // tools the payload was coded with
    std::int64_t sse = 0;      // reconstruction against the source
    double cost = 0.0;         // sse + lambda * 8 * bitstream bytes
    double seconds = 0.0;      // wall clock for the whole call
};

struct DecodeResult {
    PackedVideo video;
    CodecConfig config;
    ToolSet active;
    CuRecordSet records;
};

namespace detail {

inline int pad8(int v) { return (v + 7) / 8 * 8; }

/// Frame as a plane padded to a multiple of 8 by edge replication.
inline SamplePlane padded_plane(const std::vector<std::uint16_t>& f, int h, int w) {
    SamplePlane p(pad8(w), pad8(h));
    for (int y = 0; y < p.height(); ++y)
        for (int x = 0; x < p.width(); ++x)
            p(x, y) = f[static_cast<std::size_t>(std::min(y, h - 1)) * w + std::min(x, w - 1)];
    return p;
}

inline std::vector<std::uint16_t> cropped_samples(const SamplePlane& p, int h, int w) {
    std::vector<std::uint16_t> out(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint16_t>(p(x, y));
    return out;
}

inline std::vector<Rect> ctu_grid(int w, int h, int ctu) {
    std::vector<Rect> out;
    for (int y = 0; y < h; y += ctu)
        for (int x = 0; x < w; x += ctu) out.push_back({x, y, ctu, ctu});
    return out;
}

inline std::vector<std::uint8_t> config_bytes(const CodecConfig& cfg) {
    ByteWriter w;
    write_config(w, cfg);
    return w.take();
}

inline std::uint64_t header_digest(int qp, std::uint32_t frames, std::uint32_t h, std::uint32_t w,
                                   std::span<const std::uint8_t> config, std::uint16_t active) {
    Fnv1a d;
    d.update_u64(kFcbVersion);
    d.update_u64(static_cast<std::uint64_t>(qp));
    d.update_u64(frames);
    d.update_u64(h);
    d.update_u64(w);
    d.update(config);
    d.update_u64(active);
    return d.value();
}

/// Everything a frame leaves behind for the frames after it.
struct CodedFrame {
    SamplePlane filtered;
    MotionField motion;
};

/// Shared frame set-up: references are the previous filtered frames.
inline FrameState frame_state(const CodecConfig& cfg, ToolSet active, int w, int h, int index,
                              const std::vector<CodedFrame>& done) {
    FrameState fs(cfg, active, w, h, index);
    fs.inter = index > 0;
    fs.ref_count = std::min(cfg.ref_frames, index);
    for (int k = 0; k < fs.ref_count; ++k) fs.refs.push_back(&done[done.size() - 1 - k].filtered);
    if (index > 0) fs.colocated = &done.back().motion;
    return fs;
}

/// Marks the deblocking and SAO columns of the frame's records.
inline void annotate_filters(CuRecordSet& records, std::size_t first, const Plane<std::uint8_t>& touched,
                             const std::vector<SaoParams>& sao, int frame_w, int ctu) {
    const int cols = (frame_w + ctu - 1) / ctu;
    for (std::size_t i = first; i < records.size(); ++i) {
        auto& r = records[i];
        for (int y = r.y >> 2; y < (r.y + r.height) >> 2 && !r.dbf; ++y)
            for (int x = r.x >> 2; x < (r.x + r.width) >> 2; ++x)
                if (touched(x, y)) {
                    r.dbf = true;
                    break;
                }
        if (!sao.empty()) r.sao = sao[static_cast<std::size_t>(r.y / ctu) * cols + r.x / ctu].type != SaoType::off;
    }
}

struct PassResult {
    std::vector<std::uint8_t> payload;
    CuRecordSet records;
    std::vector<SamplePlane> filtered;
};

inline PassResult encode_pass(const std::vector<SamplePlane>& src, const CodecConfig& cfg, ToolSet active) {
    const int w = src[0].width(), h = src[0].height();
    const auto ctus = ctu_grid(w, h, cfg.ctu_size);
    const double lambda = rd_lambda(cfg.qp);
    RangeEncoder enc;
    Metered<RangeEncoder> meter(enc);
    PassResult out;
    std::vector<CodedFrame> done;
    for (int f = 0; f < static_cast<int>(src.size()); ++f) {
        FrameState fs = frame_state(cfg, active, w, h, f, done);
        FrameEncoder fe(fs, src[f]);
        const std::size_t first = out.records.size();
        for (const auto& ctu : ctus) {
            auto tree = fe.search_ctu(ctu);
            std::size_t si = 0, ci = 0;
            code_tree(meter, fs, {ctu, 0, 0}, tree, si, ci, [&](const CuSyntax& cu, double bits, double rbits) {
                auto rec = make_record(fs, cu);
                rec.bits = bits;
                rec.residual_bits = rbits;
                out.records.push_back(std::move(rec));
            });
        }
        SamplePlane deb = fs.recon;
        Plane<std::uint8_t> touched(w / 4, h / 4, 0);
        if (active.has(Tool::dbf)) deblock(deb, fs.map, cfg.qp, &touched);
        SamplePlane filtered = deb;
        std::vector<SaoParams> sao;
        if (active.has(Tool::sao)) {
            SaoContexts sctx;
            for (const auto& ctu : ctus) {
                const Rect r = fs.clip(ctu);
                auto p = sao_decide(src[f], deb, r, lambda).params;
                sao_apply(deb, filtered, r, p);
                code_sao(enc, sctx, p);
                sao.push_back(p);
            }
        }
        annotate_filters(out.records, first, touched, sao, w, cfg.ctu_size);
        out.filtered.push_back(filtered);
        done.push_back({std::move(filtered), fs.map.motion});
    }
    out.payload = enc.finish();
    return out;
}

inline std::vector<std::uint8_t> write_container(const CodecConfig& cfg, ToolSet active, std::uint32_t frames,
                                                 std::uint32_t h, std::uint32_t w, std::span<const std::uint8_t> payload) {
    const auto cb = config_bytes(cfg);
    ByteWriter out;
    out.bytes(std::span(reinterpret_cast<const std::uint8_t*>(kFcbMagic), 4));
    out.u16(kFcbVersion);
    out.u64(header_digest(cfg.qp, frames, h, w, cb, active.bits()));
    out.u8(static_cast<std::uint8_t>(cfg.qp));
    out.u32(frames);
    out.u32(h);
    out.u32(w);
    out.bytes(cb);
    out.u16(active.bits());
    out.u32(static_cast<std::uint32_t>(payload.size()));
    out.bytes(payload);
    return out.take();
}

}  // namespace detail

/// Encodes a packed video. Deterministic for fixed inputs.
inline EncodeResult encode_sequence(const PackedVideo& video, const CodecConfig& cfg, const EncoderOptions& opt = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    validate(video);
    validate(cfg);
    std::vector<SamplePlane> src;
    for (const auto& f : video.frames) src.push_back(detail::padded_plane(f, video.height, video.width));
    const double lambda = rd_lambda(cfg.qp);
    const auto frames = static_cast<std::uint32_t>(video.frame_count);
    const auto h = static_cast<std::uint32_t>(video.height), w = static_cast<std::uint32_t>(video.width);

    EncodeResult best;
    bool have = false;
    auto run = [&](ToolSet active) {
        auto pass = detail::encode_pass(src, cfg, active);
        EncodeResult r;
        r.bitstream = detail::write_container(cfg, active, frames, h, w, pass.payload);
        r.records = std::move(pass.records);
        r.active = active;
        r.reconstruction.frame_count = video.frame_count;
        r.reconstruction.height = video.height;
        r.reconstruction.width = video.width;
        for (std::size_t f = 0; f < pass.filtered.size(); ++f) {
            r.reconstruction.frames.push_back(detail::cropped_samples(pass.filtered[f], video.height, video.width));
            for (std::size_t i = 0; i < video.frames[f].size(); ++i) {
                const std::int64_t e = static_cast<std::int64_t>(video.frames[f][i]) - r.reconstruction.frames[f][i];
                r.sse += e * e;
            }
        }
        r.cost = static_cast<double>(r.sse) + lambda * 8.0 * static_cast<double>(r.bitstream.size());
        if (!have || r.cost < best.cost) {
            best = std::move(r);
            have = true;
        }
    };
    run(cfg.tools);
    if (opt.tool_fallback && cfg.tools.bits() != 0) run(ToolSet{});
    best.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return best;
}

/// Parses and decodes an FCB bitstream. Any inconsistency is a CorruptionError
/// (FormatError for a foreign or newer container); nothing partial is returned.
inline DecodeResult decode_bitstream(std::span<const std::uint8_t> bytes) {
    ByteReader in(bytes);
    const auto magic = in.bytes(4, "magic");
    if (!std::equal(magic.begin(), magic.end(), reinterpret_cast<const std::uint8_t*>(kFcbMagic)))
        throw FormatError("not an FCB bitstream");
    const auto version = in.u16("version");
    if (version != kFcbVersion) throw FormatError("unsupported FCB version " + std::to_string(version));
    DecodeResult out;
    std::span<const std::uint8_t> payload;
    try {
        const auto digest = in.u64("digest");
        const int qp = in.u8("qp");
        const auto frames = in.u32("frame count");
        const auto h = in.u32("height");
        const auto w = in.u32("width");
        const auto cb = in.bytes(detail::config_bytes(CodecConfig{}).size(), "config");
        const auto active_bits = in.u16("active tools");
        if (digest != detail::header_digest(qp, frames, h, w, cb, active_bits)) throw CorruptionError("FCB header digest mismatch");
        ByteReader cr(cb);
        out.config = read_config(cr, qp);
        out.active = ToolSet::from_bits(active_bits);
        if ((out.active & ~out.config.tools).bits() != 0) throw CorruptionError("active tools outside the configured set");
        if (frames < 1 || h < 1 || w < 1 || static_cast<std::uint64_t>(frames) * h * w > (1ull << 30))
            throw CorruptionError("implausible FCB geometry");
        const auto len = in.u32("payload length");
        if (in.remaining() != len) throw CorruptionError(in.remaining() < len ? "FCB payload truncated" : "trailing bytes after FCB payload");
        payload = in.bytes(len, "payload");
        out.video.frame_count = static_cast<int>(frames);
        out.video.height = static_cast<int>(h);
        out.video.width = static_cast<int>(w);
    } catch (const FormatError& e) {
        throw CorruptionError(e.what());
    } catch (const ConfigError& e) {
        throw CorruptionError(e.what());
    }

    const int pw = detail::pad8(out.video.width), ph = detail::pad8(out.video.height);
    const auto& cfg = out.config;
    const auto ctus = detail::ctu_grid(pw, ph, cfg.ctu_size);
    RangeDecoder dec(payload);
    Metered<RangeDecoder> meter(dec);
    std::vector<detail::CodedFrame> done;
    for (int f = 0; f < out.video.frame_count; ++f) {
        FrameState fs = detail::frame_state(cfg, out.active, pw, ph, f, done);
        const std::size_t first = out.records.size();
        for (const auto& ctu : ctus) {
            CodingTree tree;
            std::size_t si = 0, ci = 0;
            code_tree(meter, fs, {ctu, 0, 0}, tree, si, ci, [&](const CuSyntax& cu, double bits, double rbits) {
                auto rec = make_record(fs, cu);
                rec.bits = bits;
                rec.residual_bits = rbits;
                out.records.push_back(std::move(rec));
            });
        }
        SamplePlane deb = fs.recon;
        Plane<std::uint8_t> touched(pw / 4, ph / 4, 0);
        if (out.active.has(Tool::dbf)) deblock(deb, fs.map, cfg.qp, &touched);
        SamplePlane filtered = deb;
        std::vector<SaoParams> sao;
        if (out.active.has(Tool::sao)) {
            SaoContexts sctx;
            for (const auto& ctu : ctus) {
                SaoParams p;
                code_sao(dec, sctx, p);
                sao_apply(deb, filtered, fs.clip(ctu), p);
                sao.push_back(p);
            }
        }
        detail::annotate_filters(out.records, first, touched, sao, pw, cfg.ctu_size);
        out.video.frames.push_back(detail::cropped_samples(filtered, out.video.height, out.video.width));
        done.push_back({std::move(filtered), fs.map.motion});
    }
    return out;
}

}  // namespace fcm::codec
