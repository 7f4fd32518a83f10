#pragma once

// Small feature-like videos for codec tests.

#include <algorithm>
#include <cstdint>
#include <random>

#include "fcm/codec/config.hpp"
#include "fcm/packer.hpp"
#include "fcm/tensor_io.hpp"

namespace fcm::testing {

/// Packs `channels` tensors of size x size into a video, then crops it to
/// width x height (which may be smaller than the packed frame).
inline PackedVideo feature_video(std::uint64_t seed, int frames, int width, int height, int channels = 16, int size = 16,
                                 NoiseModel noise = NoiseModel::gaussian_blobs) {
    SynthSpec spec;
    spec.family = SynthFamily::custom;
    spec.custom_shapes = {{channels, size, size}};
    spec.frames = frames;
    spec.noise_model = noise;
    spec.seed = seed;
    auto packed = pack(synth_tensor_set(spec), 8).video;
    PackedVideo v;
    v.frame_count = frames;
    v.width = width;
    v.height = height;
    for (const auto& f : packed.frames) {
        std::vector<std::uint16_t> out(static_cast<std::size_t>(width) * height, kPadSample);
        for (int y = 0; y < std::min(height, packed.height); ++y)
            for (int x = 0; x < std::min(width, packed.width); ++x)
                out[static_cast<std::size_t>(y) * width + x] = f[static_cast<std::size_t>(y) * packed.width + x];
        v.frames.push_back(std::move(out));
    }
    return v;
}

inline PackedVideo constant_video(int frames, int width, int height, std::uint16_t value) {
    PackedVideo v;
    v.frame_count = frames;
    v.width = width;
    v.height = height;
    v.frames.assign(frames, std::vector<std::uint16_t>(static_cast<std::size_t>(width) * height, value));
    return v;
}

/// Random feature-like, flat, or noise content up to the given geometry.
inline PackedVideo random_video(std::mt19937_64& rng, int max_w, int max_h, int max_frames) {
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
    const int w = pick(8, max_w), h = pick(8, max_h), frames = pick(1, max_frames);
    switch (rng() % 4) {
        case 0: return constant_video(frames, w, h, static_cast<std::uint16_t>(pick(0, 1023)));
        case 1: {
            auto v = constant_video(frames, w, h, 0);
            for (auto& f : v.frames)
                for (auto& s : f) s = static_cast<std::uint16_t>(rng() % 1024);
            return v;
        }
        default: {
            const auto noise = rng() % 2 ? NoiseModel::gaussian_blobs : NoiseModel::uniform;
            return feature_video(rng(), frames, w, h, pick(1, 24), pick(4, 24), noise);
        }
    }
}

/// A valid configuration with random tools, depths, and qp.
inline codec::CodecConfig random_config(std::mt19937_64& rng) {
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
    codec::CodecConfig c;
    c.qp = pick(12, 47);
    c.ctu_size = rng() % 3 ? 32 : 64;
    c.max_mtt_depth = pick(0, 3);
    c.tools = codec::ToolSet::from_bits(static_cast<std::uint16_t>(rng() & ((1u << codec::kToolCount) - 1)));
    c.search_range = 1 << pick(2, 5);
    c.ref_frames = pick(1, 2);
    if (rng() % 3 == 0) {
        std::vector<int> modes;
        for (int m = 2; m < codec::kIntraModeCount; ++m)
            if (rng() % 5 == 0) modes.push_back(m);
        c.allowed_intra_modes = codec::IntraModeSet(modes);
    }
    return c;
}

}  // namespace fcm::testing
