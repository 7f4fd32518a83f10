#pragma once

// Encoding time vs BD-rate trade-offs, lower is better on both axes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "fcm/error.hpp"
#include "fcm/profiles.hpp"

namespace fcm::pareto {

struct TradeoffPoint {
    std::string id;
    double x = 0.0;  // encoding time, percent of anchor
    double y = 0.0;  // average BD-rate, percent
    bool operator==(const TradeoffPoint&) const = default;
};

/// a dominates b: no worse on both axes and better on one.
inline bool dominates(const TradeoffPoint& a, const TradeoffPoint& b) {
    return a.x <= b.x && a.y <= b.y && (a.x < b.x || a.y < b.y);
}

/// Non-dominated points sorted by x; points with equal x keep input order
/// and exact duplicates are all kept.
inline std::vector<TradeoffPoint> pareto_front(const std::vector<TradeoffPoint>& points) {
    for (const auto& p : points) {
        if (!(p.x > 0.0) || !std::isfinite(p.x)) throw ValidationError("trade-off point '" + p.id + "' needs a positive time");
        if (!std::isfinite(p.y)) throw ValidationError("trade-off point '" + p.id + "' has a non-finite BD-rate");
    }
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a].x < points[b].x; });

    std::vector<TradeoffPoint> front;
    double best_y = std::numeric_limits<double>::infinity();  // over strictly smaller x
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        double group_min = std::numeric_limits<double>::infinity();
        while (j < order.size() && points[order[j]].x == points[order[i]].x) group_min = std::min(group_min, points[order[j++]].y);
        if (group_min < best_y) {
            for (std::size_t k = i; k < j; ++k)
                if (points[order[k]].y == group_min) front.push_back(points[order[k]]);
            best_y = group_min;
        }
        i = j;
    }
    return front;
}

/// Published (encoding time, average BD-rate) of every group and combination.
inline std::vector<TradeoffPoint> registry_points() {
    std::vector<TradeoffPoint> out;
    for (const auto& e : profiles::registry()) {
        if (e.kind != profiles::EntryKind::group && e.kind != profiles::EntryKind::combination) continue;
        out.push_back({e.id, e.published->enc_time, e.published->avg_bd_rate});
    }
    return out;
}

}  // namespace fcm::pareto
