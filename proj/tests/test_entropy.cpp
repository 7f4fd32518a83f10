#include <gtest/gtest.h>

#include <random>

#include "fcm/codec/entropy.hpp"

namespace {

using namespace fcm;
using namespace fcm::codec;

TEST(RangeCoder, FixedHalfProbabilityBinsCostOneBitEach) {
    RangeEncoder enc;
    std::mt19937 rng(1);
    std::vector<bool> bits;
    for (int i = 0; i < 1000; ++i) bits.push_back(rng() & 1);
    for (bool b : bits) enc.bypass(b);
    const auto out = enc.finish();
    EXPECT_NEAR(static_cast<double>(out.size()), 125.0, 2.0);
    RangeDecoder dec(out);
    for (bool b : bits) ASSERT_EQ(dec.bypass(false), b);
}

TEST(RangeCoder, IdenticalAdaptiveBinsCompress) {
    RangeEncoder enc;
    Context ctx;
    for (int i = 0; i < 1000; ++i) enc.bin(ctx, true);
    const auto out = enc.finish();
    EXPECT_LT(out.size(), 30u);
    RangeDecoder dec(out);
    Context d;
    for (int i = 0; i < 1000; ++i) ASSERT_TRUE(dec.bin(d, false));
}

template <typename C>
void random_syntax(C& c, std::vector<Context>& ctx, std::mt19937& rng, std::vector<std::uint32_t>& values) {
    // values are produced on the writing side and checked on the reading side
    const bool reading = C::kReading;
    std::size_t k = 0;
    auto next = [&](std::uint32_t v) -> std::uint32_t {
        if (reading) return values[k++];
        values.push_back(v);
        return v;
    };
    const int n = 200;
    for (int i = 0; i < n; ++i) {
        const int kind = static_cast<int>(rng() % 5);
        const std::uint32_t want = next(rng());
        std::uint32_t got = 0;
        switch (kind) {
            case 0: got = c.bin(ctx[want % ctx.size()], (want >> 8) & 1) ? 1 : 0; break;
            case 1: got = c.bypass((want >> 3) & 1) ? 1 : 0; break;
            case 2: got = c.bypass_bits(want & 0x3FF, 10); break;
            case 3: got = code_exp_golomb(c, want % 5000); break;
            case 4: got = static_cast<std::uint32_t>(code_truncated_binary(c, static_cast<int>(want % 37), 37)); break;
        }
        if (reading) {
            std::uint32_t expect = 0;
            switch (kind) {
                case 0: expect = (want >> 8) & 1; break;
                case 1: expect = (want >> 3) & 1; break;
                case 2: expect = want & 0x3FF; break;
                case 3: expect = want % 5000; break;
                case 4: expect = want % 37; break;
            }
            ASSERT_EQ(got, expect) << "symbol " << i;
        }
    }
}

TEST(RangeCoder, RandomSyntaxRoundTrip) {
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<std::uint32_t> values;
        std::vector<Context> ctx(8);
        std::mt19937 wr(static_cast<unsigned>(trial));
        RangeEncoder enc;
        random_syntax(enc, ctx, wr, values);
        const auto out = enc.finish();
        std::vector<Context> dctx(8);
        std::mt19937 rd(static_cast<unsigned>(trial));
        RangeDecoder dec(out);
        random_syntax(dec, dctx, rd, values);
        if (HasFatalFailure()) return;
    }
}

TEST(RangeCoder, EstimatedRateWithinTwoPercentOnLongStreams) {
    std::mt19937 rng(5);
    std::vector<Context> enc_ctx(16), est_ctx(16);
    RangeEncoder enc;
    RateEstimator est;
    const int n = 60000;
    for (int i = 0; i < n; ++i) {
        const int c = static_cast<int>(rng() % 16);
        const bool b = (rng() % 100) < static_cast<unsigned>(5 + 5 * c);
        est.bin(est_ctx[c], b);
        est_ctx[c].update(b);  // estimator prices against the live model here
        enc.bin(enc_ctx[c], b);
    }
    const double actual = 8.0 * static_cast<double>(enc.finish().size());
    ASSERT_GT(actual, 10000.0);
    EXPECT_NEAR(est.bits(), actual, 0.02 * actual);
}

TEST(RangeCoder, TruncatedPayloadIsCorruption) {
    RangeEncoder enc;
    Context ctx;
    std::mt19937 rng(3);
    for (int i = 0; i < 4000; ++i) enc.bin(ctx, rng() % 3 == 0);
    auto out = enc.finish();
    out.resize(out.size() / 2);
    RangeDecoder dec(out);
    Context d;
    EXPECT_THROW(
        {
            for (int i = 0; i < 4000; ++i) dec.bin(d, false);
        },
        CorruptionError);
}

TEST(Binarisation, ExpGolombLengths) {
    for (std::uint32_t v : {0u, 1u, 2u, 6u, 7u, 1000u}) {
        RateEstimator est;
        code_exp_golomb(est, v);
        int len = 0;
        while ((v + 1) >> (len + 1)) ++len;
        EXPECT_EQ(est.bits(), 2 * len + 1);
    }
}

}  // namespace
