#pragma once

// Feature tensor data model, the FCT container and synthetic generators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fcm/binary_io.hpp"
#include "fcm/error.hpp"

namespace fcm {

/// One 4-D feature tensor, stored T x C x H x W (T-major).
struct FeatureTensor {
    int id = 1;
    int frames = 1;
    int channels = 1;
    int height = 1;
    int width = 1;
    std::vector<float> data;

    [[nodiscard]] std::size_t element_count() const {
        return static_cast<std::size_t>(frames) * channels * height * width;
    }
    [[nodiscard]] std::size_t index(int t, int c, int y, int x) const {
        return ((static_cast<std::size_t>(t) * channels + c) * height + y) * width + x;
    }
    float& at(int t, int c, int y, int x) { return data[index(t, c, y, x)]; }
    [[nodiscard]] float at(int t, int c, int y, int x) const { return data[index(t, c, y, x)]; }

    bool operator==(const FeatureTensor&) const = default;
};

struct FeatureTensorSet {
    std::vector<FeatureTensor> tensors;
    std::string source_tag;

    [[nodiscard]] int frames() const { return tensors.empty() ? 0 : tensors.front().frames; }
    [[nodiscard]] std::size_t element_count() const {
        std::size_t n = 0;
        for (const auto& t : tensors) n += t.element_count();
        return n;
    }

    bool operator==(const FeatureTensorSet&) const = default;
};

/// Throws ValidationError when any invariant of the set is broken.
inline void validate(const FeatureTensorSet& set) {
    if (set.tensors.empty()) throw ValidationError("tensor set is empty");
    const int frames = set.tensors.front().frames;
    for (std::size_t i = 0; i < set.tensors.size(); ++i) {
        const auto& t = set.tensors[i];
        if (t.id != static_cast<int>(i) + 1)
            throw ValidationError("tensor ids must be 1..N in order; found " + std::to_string(t.id) + " at position " +
                                  std::to_string(i + 1));
        if (t.frames < 1 || t.channels < 1 || t.height < 1 || t.width < 1)
            throw ValidationError("tensor " + std::to_string(t.id) + " has a zero dimension");
        if (t.frames != frames) throw ValidationError("tensors disagree on frame count T");
        if (t.data.size() != t.element_count())
            throw ValidationError("tensor " + std::to_string(t.id) + " payload length does not match its shape");
        for (float v : t.data)
            if (!std::isfinite(v)) throw ValidationError("tensor " + std::to_string(t.id) + " contains a non-finite value");
    }
}

namespace detail {
inline constexpr char kFctMagic[4] = {'F', 'C', 'T', '1'};
inline constexpr std::uint16_t kFctVersion = 1;
}  // namespace detail

/// Serialises to the FCT layout. The provenance tag follows the payload as
/// a u32 length plus UTF-8 bytes.
inline std::vector<std::uint8_t> encode_tensor_set(const FeatureTensorSet& set) {
    validate(set);
    ByteWriter w;
    w.text(std::string_view(detail::kFctMagic, 4));
    w.u16(detail::kFctVersion);
    w.u16(static_cast<std::uint16_t>(set.tensors.size()));
    for (const auto& t : set.tensors) {
        w.u16(static_cast<std::uint16_t>(t.id));
        w.u32(static_cast<std::uint32_t>(t.frames));
        w.u32(static_cast<std::uint32_t>(t.channels));
        w.u32(static_cast<std::uint32_t>(t.height));
        w.u32(static_cast<std::uint32_t>(t.width));
    }
    for (const auto& t : set.tensors)
        for (float v : t.data) w.f32(v);
    w.u32(static_cast<std::uint32_t>(set.source_tag.size()));
    w.text(set.source_tag);
    return w.take();
}

inline FeatureTensorSet decode_tensor_set(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || !std::equal(detail::kFctMagic, detail::kFctMagic + 4, bytes.begin()))
        throw FormatError("not an FCT file (bad magic)");
    ByteReader r(bytes);
    r.bytes(4);
    const auto version = r.u16("version");
    if (version != detail::kFctVersion) throw FormatError("unsupported FCT version " + std::to_string(version));
    const int count = r.u16("tensor count");
    FeatureTensorSet set;
    for (int i = 0; i < count; ++i) {
        FeatureTensor t;
        t.id = r.u16("tensor id");
        t.frames = static_cast<int>(r.u32("T"));
        t.channels = static_cast<int>(r.u32("C"));
        t.height = static_cast<int>(r.u32("H"));
        t.width = static_cast<int>(r.u32("W"));
        if (t.frames < 1 || t.channels < 1 || t.height < 1 || t.width < 1)
            throw FormatError("tensor " + std::to_string(t.id) + " has a zero dimension");
        set.tensors.push_back(std::move(t));
    }
    for (auto& t : set.tensors) {
        const std::size_t n = t.element_count();
        if (r.remaining() / 4 < n)
            throw CorruptionError("payload truncated inside tensor " + std::to_string(t.id));
        t.data.resize(n);
        for (std::size_t k = 0; k < n; ++k) t.data[k] = r.f32();
    }
    if (!r.at_end()) {
        const auto len = r.u32("source tag length");
        auto tag = r.bytes(len, "source tag");
        set.source_tag.assign(tag.begin(), tag.end());
        if (!r.at_end()) throw FormatError("trailing bytes after FCT source tag");
    }
    validate(set);
    return set;
}

inline void save_tensor_set(const FeatureTensorSet& set, const std::filesystem::path& path) {
    write_file(path, encode_tensor_set(set));
}

inline FeatureTensorSet load_tensor_set(const std::filesystem::path& path) {
    return decode_tensor_set(read_file(path));
}

// ---------------------------------------------------------------------------
// Synthetic content

enum class SynthFamily { fpn, darknet, darknet_reduced, custom };
enum class NoiseModel { gaussian_blobs, sparse_relu, uniform };

struct TensorShape {
    int channels = 1;
    int height = 1;
    int width = 1;
    bool operator==(const TensorShape&) const = default;
};

/// Parameters of a seeded synthetic tensor set. base_height/base_width are
/// the resized network input; the darknet defaults (608x1088) reproduce the
/// JDE split-point grids 76x136, 38x68 and 19x34.
struct SynthSpec {
    SynthFamily family = SynthFamily::darknet;
    int base_height = 608;
    int base_width = 1088;
    int frames = 1;
    NoiseModel noise_model = NoiseModel::gaussian_blobs;
    std::uint64_t seed = 1;
    std::vector<TensorShape> custom_shapes;  // family == custom only
};

inline SynthFamily parse_synth_family(std::string_view s) {
    if (s == "fpn") return SynthFamily::fpn;
    if (s == "darknet") return SynthFamily::darknet;
    if (s == "darknet_reduced") return SynthFamily::darknet_reduced;
    if (s == "custom") return SynthFamily::custom;
    throw ConfigError("unknown synthetic family '" + std::string(s) + "'");
}

inline NoiseModel parse_noise_model(std::string_view s) {
    if (s == "gaussian_blobs") return NoiseModel::gaussian_blobs;
    if (s == "sparse_relu") return NoiseModel::sparse_relu;
    if (s == "uniform") return NoiseModel::uniform;
    throw ConfigError("unknown noise model '" + std::string(s) + "'");
}

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

/// Shapes produced by a family rule.
inline std::vector<TensorShape> synth_shapes(const SynthSpec& spec) {
    if (spec.base_height < 1 || spec.base_width < 1) throw ConfigError("base resolution must be positive");
    std::vector<TensorShape> shapes;
    switch (spec.family) {
        case SynthFamily::fpn:
            for (int n = 1; n <= 4; ++n) {
                const int div = 1 << (n + 1);
                shapes.push_back({256, ceil_div(spec.base_height, div), ceil_div(spec.base_width, div)});
            }
            break;
        case SynthFamily::darknet:
        case SynthFamily::darknet_reduced: {
            const int c0 = spec.family == SynthFamily::darknet ? 256 : 128;
            for (int n = 0; n < 3; ++n) {
                const int stride = 8 << n;
                shapes.push_back({c0 << n, ceil_div(spec.base_height, stride), ceil_div(spec.base_width, stride)});
            }
            break;
        }
        case SynthFamily::custom:
            if (spec.custom_shapes.empty()) throw ConfigError("custom family needs at least one shape");
            shapes = spec.custom_shapes;
            break;
    }
    return shapes;
}

/// Small deterministic sampler on top of mt19937_64. The standard
/// distributions are implementation-defined, so they are avoided here.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    std::uint64_t next() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

namespace detail {

// Smooth bumps per channel; every frame shifts the whole pattern by the same
// global motion, like a feature map of a panning camera.
inline void fill_blobs(FeatureTensor& t, SplitRng& rng) {
    const double gdx = rng.uniform(-1.0, 1.0), gdy = rng.uniform(-1.0, 1.0);
    for (int c = 0; c < t.channels; ++c) {
        const int bumps = rng.uniform_int(1, 3);
        struct Bump { double cx, cy, sx, sy, amp; };
        std::vector<Bump> bs;
        for (int b = 0; b < bumps; ++b)
            bs.push_back({rng.uniform(0, t.width), rng.uniform(0, t.height), rng.uniform(0.5, 0.25 * t.width + 1.0),
                          rng.uniform(0.5, 0.25 * t.height + 1.0), rng.uniform(-1.0, 4.0)});
        const double bias = rng.uniform(-0.5, 0.5);
        for (int f = 0; f < t.frames; ++f)
            for (int y = 0; y < t.height; ++y)
                for (int x = 0; x < t.width; ++x) {
                    double v = bias;
                    for (const auto& b : bs) {
                        const double dx = (x - b.cx - gdx * f) / b.sx, dy = (y - b.cy - gdy * f) / b.sy;
                        v += b.amp * std::exp(-0.5 * (dx * dx + dy * dy));
                    }
                    t.at(f, c, y, x) = static_cast<float>(v);
                }
    }
}

}  // namespace detail

inline FeatureTensorSet synth_tensor_set(const SynthSpec& spec) {
    if (spec.frames < 1) throw ConfigError("frames must be >= 1");
    const auto shapes = synth_shapes(spec);
    SplitRng rng(spec.seed);
    FeatureTensorSet set;
    set.source_tag = "synth";
    for (std::size_t n = 0; n < shapes.size(); ++n) {
        FeatureTensor t;
        t.id = static_cast<int>(n) + 1;
        t.frames = spec.frames;
        t.channels = shapes[n].channels;
        t.height = shapes[n].height;
        t.width = shapes[n].width;
        t.data.assign(t.element_count(), 0.0f);
        switch (spec.noise_model) {
            case NoiseModel::gaussian_blobs:
                detail::fill_blobs(t, rng);
                break;
            case NoiseModel::sparse_relu:
                for (auto& v : t.data) {
                    const double g = std::abs(rng.normal());
                    v = rng.uniform() < 0.7 ? 0.0f : static_cast<float>(g);
                }
                break;
            case NoiseModel::uniform:
                for (auto& v : t.data) v = static_cast<float>(rng.uniform());
                break;
        }
        set.tensors.push_back(std::move(t));
    }
    return set;
}

// ---------------------------------------------------------------------------
// Feature-domain distortion

struct DistortionReport {
    std::vector<double> per_tensor_mse;
    double aggregate_mse = 0.0;  // element-count weighted
};

inline DistortionReport feature_distortion(const FeatureTensorSet& a, const FeatureTensorSet& b) {
    if (a.tensors.size() != b.tensors.size()) throw ValidationError("tensor sets differ in tensor count");
    DistortionReport rep;
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < a.tensors.size(); ++i) {
        const auto& ta = a.tensors[i];
        const auto& tb = b.tensors[i];
        if (ta.frames != tb.frames || ta.channels != tb.channels || ta.height != tb.height || ta.width != tb.width ||
            ta.data.size() != tb.data.size())
            throw ValidationError("shape mismatch at tensor " + std::to_string(ta.id));
        double s = 0.0;
        for (std::size_t k = 0; k < ta.data.size(); ++k) {
            const double d = static_cast<double>(ta.data[k]) - static_cast<double>(tb.data[k]);
            s += d * d;
        }
        rep.per_tensor_mse.push_back(ta.data.empty() ? 0.0 : s / static_cast<double>(ta.data.size()));
        total += s;
        count += ta.data.size();
    }
    rep.aggregate_mse = count ? total / static_cast<double>(count) : 0.0;
    return rep;
}

}  // namespace fcm
