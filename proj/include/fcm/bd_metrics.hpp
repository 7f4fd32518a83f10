#pragma once

// Bjøntegaard delta metrics with shape-preserving (PCHIP) interpolation.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcm/error.hpp"

namespace fcm::bd {

struct RdPoint {
    double rate = 0.0;     // bits
    double quality = 0.0;  // PSNR dB, or negated feature MSE
    int qp = 0;
    bool operator==(const RdPoint&) const = default;
};

struct RdCurve {
    std::string config_id;
    std::vector<RdPoint> points;
    bool operator==(const RdCurve&) const = default;
};

/// One encoded rung of a QP ladder with both quality axes.
struct RdSample {
    int qp = 0;
    double rate_bits = 0.0;
    double psnr = 0.0;
    double feature_mse = 0.0;
    bool operator==(const RdSample&) const = default;
};

struct RdSeries {
    std::string config_id;
    std::vector<RdSample> points;
    bool operator==(const RdSeries&) const = default;
};

enum class QualityAxis { psnr, feature_mse };

inline constexpr int kMinCurvePoints = 4;

/// Sorts by rate and checks the curve is usable.
inline RdCurve validated(RdCurve c) {
    if (static_cast<int>(c.points.size()) < kMinCurvePoints)
        throw ValidationError("RD curve '" + c.config_id + "' needs at least 4 points");
    for (const auto& p : c.points) {
        if (!(p.rate > 0.0) || !std::isfinite(p.rate)) throw ValidationError("RD curve '" + c.config_id + "' has a non-positive rate");
        if (!std::isfinite(p.quality)) throw ValidationError("RD curve '" + c.config_id + "' has a non-finite quality");
    }
    std::sort(c.points.begin(), c.points.end(), [](const RdPoint& a, const RdPoint& b) { return a.rate < b.rate; });
    for (std::size_t i = 1; i < c.points.size(); ++i) {
        if (!(c.points[i].rate > c.points[i - 1].rate)) throw ValidationError("RD curve '" + c.config_id + "' repeats a rate");
        if (!(c.points[i].quality > c.points[i - 1].quality))
            throw ValidationError("RD curve '" + c.config_id + "' is not monotone: quality must rise with rate");
    }
    return c;
}

inline RdCurve make_curve(const RdSeries& s, QualityAxis axis = QualityAxis::psnr) {
    RdCurve c;
    c.config_id = s.config_id;
    for (const auto& p : s.points) c.points.push_back({p.rate_bits, axis == QualityAxis::psnr ? p.psnr : -p.feature_mse, p.qp});
    return validated(std::move(c));
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes
/// with the usual three-point end conditions).
class Pchip {
public:
    Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 3 || y_.size() != n) throw ValidationError("interpolation needs at least 3 matching knots");
        std::vector<double> h(n - 1), m(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            h[k] = x_[k + 1] - x_[k];
            if (!(h[k] > 0.0)) throw ValidationError("interpolation knots must be strictly increasing");
            m[k] = (y_[k + 1] - y_[k]) / h[k];
        }
        d_.assign(n, 0.0);
        for (std::size_t k = 1; k + 1 < n; ++k) {
            if (m[k - 1] * m[k] <= 0.0) continue;
            const double w1 = 2.0 * h[k] + h[k - 1], w2 = h[k] + 2.0 * h[k - 1];
            d_[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
        }
        d_[0] = end_slope(h[0], h[1], m[0], m[1]);
        d_[n - 1] = end_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
    }

    [[nodiscard]] double operator()(double x) const {
        const std::size_t k = segment(x);
        const auto c = coeffs(k);
        const double t = x - x_[k];
        return c[0] + t * (c[1] + t * (c[2] + t * c[3]));
    }

    /// Exact integral over [a, b] (a ≤ b, both inside the knot range).
    [[nodiscard]] double integral(double a, double b) const {
        if (b < a) return -integral(b, a);
        const std::size_t ka = segment(a), kb = segment(b);
        double s = 0.0;
        for (std::size_t k = ka; k <= kb; ++k) {
            const double lo = k == ka ? a : x_[k];
            const double hi = k == kb ? b : x_[k + 1];
            s += antiderivative(k, hi - x_[k]) - antiderivative(k, lo - x_[k]);
        }
        return s;
    }

    [[nodiscard]] double front() const { return x_.front(); }
    [[nodiscard]] double back() const { return x_.back(); }
    [[nodiscard]] const std::vector<double>& slopes() const { return d_; }

private:
    std::vector<double> x_, y_, d_;

    static double end_slope(double h0, double h1, double m0, double m1) {
        const double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if (std::signbit(d) != std::signbit(m0) || d == 0.0 || m0 == 0.0) return 0.0;
        if (std::signbit(m0) != std::signbit(m1) && std::abs(d) > 3.0 * std::abs(m0)) return 3.0 * m0;
        return d;
    }

    [[nodiscard]] std::size_t segment(double x) const {
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - x_.begin() - 1, 0));
        return std::min(k, x_.size() - 2);
    }

    // y = c0 + c1 t + c2 t^2 + c3 t^3 on segment k, t = x - x_k
    [[nodiscard]] std::array<double, 4> coeffs(std::size_t k) const {
        const double h = x_[k + 1] - x_[k];
        const double m = (y_[k + 1] - y_[k]) / h;
        return {y_[k], d_[k], (3.0 * m - 2.0 * d_[k] - d_[k + 1]) / h, (d_[k] + d_[k + 1] - 2.0 * m) / (h * h)};
    }

    [[nodiscard]] double antiderivative(std::size_t k, double t) const {
        const auto c = coeffs(k);
        return t * (c[0] + t * (c[1] / 2.0 + t * (c[2] / 3.0 + t * c[3] / 4.0)));
    }
};

namespace detail {

struct Fits {
    Pchip anchor, test;
    double lo, hi;
};

inline Fits fit(const RdCurve& a_in, const RdCurve& t_in, bool rate_axis) {
    const auto a = validated(a_in), t = validated(t_in);
    auto axes = [&](const RdCurve& c) {
        std::vector<double> x, y;
        for (const auto& p : c.points) {
            const double lr = std::log10(p.rate);
            x.push_back(rate_axis ? p.quality : lr);
            y.push_back(rate_axis ? lr : p.quality);
        }
        return Pchip(std::move(x), std::move(y));
    };
    Fits f{axes(a), axes(t), 0.0, 0.0};
    f.lo = std::max(f.anchor.front(), f.test.front());
    f.hi = std::min(f.anchor.back(), f.test.back());
    if (!(f.hi > f.lo)) throw DomainError("RD curves '" + a.config_id + "' and '" + t.config_id + "' do not overlap");
    return f;
}

}  // namespace detail

/// Average rate difference of `test` against `anchor` at equal quality,
/// in percent; negative means the test curve is cheaper.
inline double bd_rate(const RdCurve& anchor, const RdCurve& test) {
    const auto f = detail::fit(anchor, test, true);
    const double delta = (f.test.integral(f.lo, f.hi) - f.anchor.integral(f.lo, f.hi)) / (f.hi - f.lo);
    return (std::pow(10.0, delta) - 1.0) * 100.0;
}

/// Average quality difference of `test` against `anchor` at equal rate.
inline double bd_quality(const RdCurve& anchor, const RdCurve& test) {
    const auto f = detail::fit(anchor, test, false);
    return (f.test.integral(f.lo, f.hi) - f.anchor.integral(f.lo, f.hi)) / (f.hi - f.lo);
}

// ---------------------------------------------------------------------------
// JSON: {config_id, points: [{qp, rate_bits, psnr, feature_mse}]}

inline nlohmann::json to_json(const RdSeries& s) {
    nlohmann::json j;
    j["config_id"] = s.config_id;
    j["points"] = nlohmann::json::array();
    for (const auto& p : s.points)
        j["points"].push_back({{"qp", p.qp}, {"rate_bits", p.rate_bits}, {"psnr", p.psnr}, {"feature_mse", p.feature_mse}});
    return j;
}

inline RdSeries series_from_json(const nlohmann::json& j) {
    try {
        RdSeries s;
        s.config_id = j.at("config_id").get<std::string>();
        for (const auto& p : j.at("points")) {
            RdSample r;
            r.qp = p.at("qp").get<int>();
            r.rate_bits = p.at("rate_bits").get<double>();
            r.psnr = p.value("psnr", std::numeric_limits<double>::quiet_NaN());
            r.feature_mse = p.value("feature_mse", std::numeric_limits<double>::quiet_NaN());
            s.points.push_back(r);
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad RD curve JSON: ") + e.what());
    }
}

}  // namespace fcm::bd
