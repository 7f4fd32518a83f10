#include <gtest/gtest.h>

#include <random>

#include "engine_content.hpp"
#include "fcm/codec/codec.hpp"

namespace {

using namespace fcm::codec;
using fcm::testing::constant_video;
using fcm::testing::feature_video;

void expect_roundtrip(const EncodeResult& enc) {
    const auto dec = decode_bitstream(enc.bitstream);
    ASSERT_EQ(dec.video, enc.reconstruction);
    ASSERT_EQ(dec.records.size(), enc.records.size());
    for (std::size_t i = 0; i < dec.records.size(); ++i) {
        auto a = dec.records[i], b = enc.records[i];
        // bit accounting may differ in the last ulp between coders; compare the rest exactly
        EXPECT_NEAR(a.bits, b.bits, 1e-6);
        a.bits = b.bits = a.residual_bits = b.residual_bits = 0;
        EXPECT_EQ(a, b) << "record " << i;
    }
}

TEST(Engine, ConstantFrameIsOneCu) {
    CodecConfig cfg;
    cfg.qp = 22;
    const auto enc = encode_sequence(constant_video(1, 64, 64, 300), cfg);
    ASSERT_EQ(enc.records.size(), 1u);
    EXPECT_EQ(enc.records[0].width, 64);
    EXPECT_LT(enc.bitstream.size(), 100u);
    expect_roundtrip(enc);
}

TEST(Engine, FeatureContentRoundTrips) {
    CodecConfig cfg;
    cfg.qp = 32;
    const auto enc = encode_sequence(feature_video(7, 2, 64, 64), cfg);
    expect_roundtrip(enc);
    EXPECT_GT(enc.records.size(), 1u);
}

TEST(Engine, OddGeometryRoundTrips) {
    CodecConfig cfg;
    cfg.qp = 37;
    cfg.ctu_size = 32;
    const auto enc = encode_sequence(feature_video(9, 3, 45, 37), cfg);
    EXPECT_EQ(enc.reconstruction.width, 45);
    EXPECT_EQ(enc.reconstruction.height, 37);
    expect_roundtrip(enc);
}

TEST(Engine, RecordsTileThePaddedFrame) {
    CodecConfig cfg;
    cfg.qp = 27;
    const auto v = feature_video(3, 2, 72, 40);
    const auto enc = encode_sequence(v, cfg);
    std::vector<int> cover(2 * 72 * 40, 0);
    for (const auto& r : enc.records)
        for (int y = r.y; y < r.y + r.height; ++y)
            for (int x = r.x; x < r.x + r.width; ++x) ++cover[(r.frame * 40 + y) * 72 + x];
    for (int c : cover) ASSERT_EQ(c, 1);
}

TEST(Engine, StaticSequenceMostlySkips) {
    CodecConfig cfg;
    cfg.qp = 32;
    auto v = feature_video(11, 1, 64, 64);
    v.frames.push_back(v.frames[0]);
    v.frames.push_back(v.frames[0]);
    v.frame_count = 3;
    const auto enc = encode_sequence(v, cfg);
    int inter_area = 0, skip_area = 0;
    for (const auto& r : enc.records)
        if (r.frame > 0) {
            inter_area += r.width * r.height;
            if (r.skip_flag) skip_area += r.width * r.height;
        }
    EXPECT_GT(skip_area, inter_area * 9 / 10);
    expect_roundtrip(enc);
}

TEST(Engine, MttDepthZeroGivesQuadTreeOnly) {
    CodecConfig cfg;
    cfg.qp = 27;
    cfg.max_mtt_depth = 0;
    const auto enc = encode_sequence(feature_video(5, 1, 64, 64), cfg);
    for (const auto& r : enc.records) {
        EXPECT_EQ(r.mt_depth, 0);
        EXPECT_EQ(r.width, r.height);
    }
}

TEST(Engine, TamperedHeaderIsCorruption) {
    CodecConfig cfg;
    const auto enc = encode_sequence(feature_video(2, 1, 32, 32), cfg);
    auto bad = enc.bitstream;
    bad[14] ^= 1;  // qp
    EXPECT_THROW(decode_bitstream(bad), fcm::CorruptionError);
    auto cut = enc.bitstream;
    cut.resize(cut.size() - 1);
    EXPECT_THROW(decode_bitstream(cut), fcm::CorruptionError);
    auto foreign = enc.bitstream;
    foreign[0] = 'X';
    EXPECT_THROW(decode_bitstream(foreign), fcm::FormatError);
}

TEST(Engine, MeteredBitsTrackPayload) {
    CodecConfig cfg;
    cfg.qp = 22;
    const auto enc = encode_sequence(feature_video(13, 2, 64, 64, 16, 16, fcm::NoiseModel::uniform), cfg);
    double bits = 0;
    for (const auto& r : enc.records) bits += r.bits;
    const double actual = 8.0 * static_cast<double>(enc.bitstream.size());
    ASSERT_GT(actual, 10000.0);
    // SAO trailer and container header are outside the per-CU accounting
    EXPECT_NEAR(bits / actual, 1.0, 0.03);
}

TEST(Engine, FuzzedEncodesDecodeWithoutDrift) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 12; ++trial) {
        const auto v = fcm::testing::random_video(rng, 64, 64, 3);
        const auto cfg = fcm::testing::random_config(rng);
        SCOPED_TRACE(testing::Message() << "trial " << trial << " " << v.width << "x" << v.height << "x" << v.frame_count
                                        << " qp " << cfg.qp << " tools " << cfg.tools.bits());
        expect_roundtrip(encode_sequence(v, cfg, {.tool_fallback = false}));
    }
}

TEST(Engine, DisabledToolsNeverAppear) {
    std::mt19937_64 rng(77);
    for (auto t : kAllTools) {
        auto cfg = fcm::testing::random_config(rng);
        cfg.tools = ToolSet::all();
        cfg.enable(t, false);
        const auto enc = encode_sequence(feature_video(rng(), 2, 32, 32), cfg);
        for (const auto& r : enc.records) ASSERT_FALSE(uses_tool(r, t)) << tool_name(t);
    }
}

TEST(Engine, SkipCusCarryNoResidualBits) {
    CodecConfig cfg;
    auto v = feature_video(21, 2, 64, 64);
    const auto enc = encode_sequence(v, cfg);
    for (const auto& r : enc.records) {
        EXPECT_FALSE(r.skip_flag && r.root_cbf);
        if (r.skip_flag) {
            EXPECT_TRUE(r.merge_flag);
            EXPECT_EQ(r.residual_bits, 0.0);
        }
        EXPECT_EQ(r.depth, r.qt_depth + r.mt_depth);
        if (r.pred_mode == PredMode::inter && !r.ciip_flag) {
            EXPECT_FALSE(r.intra_mode.has_value());
        }
        if (r.pred_mode == PredMode::intra) {
            EXPECT_FALSE(r.mv.has_value());
        }
    }
}

TEST(Engine, SearchBeatsRandomTrees) {
    // sharp vertical edge at x = 8
    auto v = constant_video(1, 64, 64, 200);
    for (int y = 0; y < 64; ++y)
        for (int x = 8; x < 64; ++x) v.frames[0][static_cast<std::size_t>(y) * 64 + x] = static_cast<std::uint16_t>(700 + (x * 7 + y * 3) % 11);
    CodecConfig cfg;
    cfg.qp = 32;
    const auto src = fcm::codec::detail::padded_plane(v.frames[0], 64, 64);
    auto fs = fcm::codec::detail::frame_state(cfg, cfg.tools, 64, 64, 0, {});
    FrameEncoder fe(fs, src);
    const Rect ctu{0, 0, 64, 64};
    double best = 0;
    const auto tree = fe.search_ctu(ctu, best);
    EXPECT_GT(tree.cus.size(), 1u);

    // replaying the chosen shape reproduces its cost
    std::size_t next = 0;
    CodingTree replay;
    const double same = fe.evaluate_ctu(ctu, [&](const CodingNode&, const SplitOptions&) { return tree.splits[next++]; }, replay);
    EXPECT_NEAR(same, best, 1e-6 * best);

    std::mt19937_64 rng(5);
    for (int k = 0; k < 20; ++k) {
        auto choose = [&](const CodingNode& n, const SplitOptions& o) {
            std::vector<SplitMode> modes;
            if (!o.forced_qt) modes.push_back(SplitMode::none);
            for (int i = 1; i < 6; ++i)
                if (o.allowed[i]) modes.push_back(static_cast<SplitMode>(i));
            // bias towards stopping so trees stay plausible
            if (!o.forced_qt && n.qt_depth + n.mt_depth > 0 && rng() % 2) return SplitMode::none;
            return modes[rng() % modes.size()];
        };
        CodingTree alt;
        const double j = fe.evaluate_ctu(ctu, choose, alt);
        EXPECT_LE(best, j + 1e-9) << "alternative " << k;
    }
}

}  // namespace
