#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace fcm::codec {

struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
    [[nodiscard]] int area() const { return w * h; }
    bool operator==(const Rect&) const = default;
};

/// Dense 2-D sample array, row-major.
template <typename T>
class Plane {
public:
    Plane() = default;
    Plane(int width, int height, T fill = T{}) : w_(width), h_(height), data_(static_cast<std::size_t>(width) * height, fill) {}

    [[nodiscard]] int width() const { return w_; }
    [[nodiscard]] int height() const { return h_; }
    T& operator()(int x, int y) { return data_[static_cast<std::size_t>(y) * w_ + x]; }
    const T& operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * w_ + x]; }
    /// Edge-replicated access for coordinates outside the plane.
    [[nodiscard]] T clamped(int x, int y) const { return (*this)(std::clamp(x, 0, w_ - 1), std::clamp(y, 0, h_ - 1)); }
    T* row(int y) { return data_.data() + static_cast<std::size_t>(y) * w_; }
    const T* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * w_; }
    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    [[nodiscard]] Plane crop(const Rect& r) const {
        Plane out(r.w, r.h);
        for (int y = 0; y < r.h; ++y) std::copy_n(row(r.y + y) + r.x, r.w, out.row(y));
        return out;
    }
    void paste(const Plane& src, int x0, int y0) {
        for (int y = 0; y < src.height(); ++y) std::copy_n(src.row(y), src.width(), row(y0 + y) + x0);
    }

    bool operator==(const Plane&) const = default;

private:
    int w_ = 0;
    int h_ = 0;
    std::vector<T> data_;
};

using SamplePlane = Plane<std::int32_t>;

inline std::int64_t sse(const SamplePlane& a, const SamplePlane& b) {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const std::int64_t d = a.data()[i] - b.data()[i];
        s += d * d;
    }
    return s;
}

inline int clip_sample(int v) { return std::clamp(v, 0, 1023); }

}  // namespace fcm::codec
