#pragma once

// Separable orthonormal DCT-II / DST-VII / DCT-VIII in a fixed-point
// realisation (15-bit basis scale, 64-bit accumulation).

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "fcm/codec/plane.hpp"

namespace fcm::codec {

enum class TransformType : std::uint8_t { dct2, dst7, dct8 };

inline constexpr int kBasisShift = 15;

/// Real-valued orthonormal basis, row k = k-th basis function.
inline std::vector<double> transform_basis(TransformType type, int n) {
    std::vector<double> m(static_cast<std::size_t>(n) * n);
    const double pi = std::numbers::pi;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            double v = 0.0;
            switch (type) {
                case TransformType::dct2:
                    v = std::sqrt(2.0 / n) * std::cos(pi * k * (2 * i + 1) / (2.0 * n));
                    if (k == 0) v *= std::numbers::sqrt2 / 2.0;
                    break;
                case TransformType::dst7:
                    v = std::sqrt(4.0 / (2 * n + 1)) * std::sin(pi * (2 * k + 1) * (i + 1) / (2.0 * n + 1));
                    break;
                case TransformType::dct8:
                    v = std::sqrt(4.0 / (2 * n + 1)) * std::cos(pi * (2 * k + 1) * (2 * i + 1) / (4.0 * n + 2));
                    break;
            }
            m[static_cast<std::size_t>(k) * n + i] = v;
        }
    return m;
}

namespace detail {

inline int log2_size(int n) {
    int l = 0;
    while ((1 << l) < n) ++l;
    return l;
}

struct IntBasisTable {
    // [type][log2 n] -> n*n integer basis
    std::array<std::array<std::vector<std::int32_t>, 7>, 3> tab;
    IntBasisTable() {
        for (int t = 0; t < 3; ++t)
            for (int l = 2; l <= 6; ++l) {
                const int n = 1 << l;
                auto real = transform_basis(static_cast<TransformType>(t), n);
                auto& out = tab[t][l];
                out.resize(real.size());
                for (std::size_t i = 0; i < real.size(); ++i)
                    out[i] = static_cast<std::int32_t>(std::lround(real[i] * (1 << kBasisShift)));
            }
    }
};

inline const std::vector<std::int32_t>& int_basis(TransformType t, int n) {
    static const IntBasisTable table;
    return table.tab[static_cast<int>(t)][log2_size(n)];
}

inline std::int32_t round_shift(std::int64_t v, int shift) {
    return static_cast<std::int32_t>((v + (std::int64_t{1} << (shift - 1))) >> shift);
}

}  // namespace detail

inline bool supported_transform_size(int n) { return n >= 4 && n <= 64 && (n & (n - 1)) == 0; }

/// Forward or inverse 2-D transform of a W x H block. type_h acts along
/// rows (horizontal frequencies), type_v along columns.
inline SamplePlane transform(const SamplePlane& in, TransformType type_h, TransformType type_v, bool inverse) {
    const int w = in.width(), h = in.height();
    const auto& bh = detail::int_basis(type_h, w);
    const auto& bv = detail::int_basis(type_v, h);
    std::vector<std::int64_t> tmp(static_cast<std::size_t>(w) * h);
    SamplePlane out(w, h);
    if (!inverse) {
        // rows: tmp[y][k] = sum_x in[y][x] * bh[k][x]
        for (int y = 0; y < h; ++y) {
            const auto* src = in.row(y);
            for (int k = 0; k < w; ++k) {
                const auto* b = &bh[static_cast<std::size_t>(k) * w];
                std::int64_t s = 0;
                for (int x = 0; x < w; ++x) s += static_cast<std::int64_t>(src[x]) * b[x];
                tmp[static_cast<std::size_t>(y) * w + k] = s;
            }
        }
        for (int k = 0; k < h; ++k) {
            const auto* b = &bv[static_cast<std::size_t>(k) * h];
            for (int x = 0; x < w; ++x) {
                std::int64_t s = 0;
                for (int y = 0; y < h; ++y) s += tmp[static_cast<std::size_t>(y) * w + x] * b[y];
                out(x, k) = detail::round_shift(s, 2 * kBasisShift);
            }
        }
    } else {
        // rows: tmp[y][x] = sum_k in[y][k] * bh[k][x]
        for (int y = 0; y < h; ++y) {
            const auto* src = in.row(y);
            for (int x = 0; x < w; ++x) {
                std::int64_t s = 0;
                for (int k = 0; k < w; ++k) s += static_cast<std::int64_t>(src[k]) * bh[static_cast<std::size_t>(k) * w + x];
                tmp[static_cast<std::size_t>(y) * w + x] = s;
            }
        }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                std::int64_t s = 0;
                for (int k = 0; k < h; ++k) s += tmp[static_cast<std::size_t>(k) * w + x] * bv[static_cast<std::size_t>(k) * h + y];
                out(x, y) = detail::round_shift(s, 2 * kBasisShift);
            }
    }
    return out;
}

/// Horizontal/vertical kernels for an MTS index (0 = DCT-II both ways).
struct TransformPair {
    TransformType h = TransformType::dct2;
    TransformType v = TransformType::dct2;
    bool operator==(const TransformPair&) const = default;
};

inline TransformPair mts_pair(int mts_idx) {
    switch (mts_idx) {
        case 1: return {TransformType::dst7, TransformType::dst7};
        case 2: return {TransformType::dct8, TransformType::dst7};
        case 3: return {TransformType::dst7, TransformType::dct8};
        case 4: return {TransformType::dct8, TransformType::dct8};
        default: return {};
    }
}

}  // namespace fcm::codec
