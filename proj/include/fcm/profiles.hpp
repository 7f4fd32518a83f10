#pragma once

// Ablation configurations: the eight tool groups, their combinations A-G,
// the default anchor and the named Fast / Faster / Fastest profiles.
// Each entry resolves to a delta against the default CodecConfig plus an
// overlay for external encoders.

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fcm/codec/config.hpp"
#include "fcm/digest.hpp"
#include "fcm/error.hpp"

namespace fcm::profiles {

using codec::Tool;
using codec::ToolSet;

inline constexpr std::array<std::string_view, 6> kDatasets = {"SFU-A/B", "SFU-C", "SFU-D", "TVD", "HiEve-1080p", "HiEve-720p"};

/// Published results relative to the default configuration.
struct PublishedMetrics {
    std::array<double, 6> bd_rate{};  // per dataset, order of kDatasets
    double avg_bd_rate = 0.0;         // percent
    double enc_time = 100.0;          // percent of anchor
    double dec_time = 100.0;          // percent of anchor
    bool operator==(const PublishedMetrics&) const = default;
};

/// Changes against the default configuration.
struct ConfigDelta {
    ToolSet disabled;
    std::optional<int> max_mtt_depth;
    std::optional<int> search_range;
    std::optional<std::vector<int>> intra_modes;  // angular modes kept besides planar/DC
    std::set<std::string> external_off;         // tools only an external encoder has (ALF)
    bool operator==(const ConfigDelta&) const = default;

    [[nodiscard]] bool empty() const { return *this == ConfigDelta{}; }
};

namespace detail {

template <typename T>
std::optional<T> merge_opt(const std::optional<T>& a, const std::optional<T>& b, std::string_view what) {
    if (a && b && *a != *b) throw ConfigError("conflicting " + std::string(what) + " overrides");
    return a ? a : b;
}

}  // namespace detail

/// Union of two deltas; conflicting parameter overrides are an error.
inline ConfigDelta operator|(const ConfigDelta& a, const ConfigDelta& b) {
    ConfigDelta out;
    out.disabled = a.disabled | b.disabled;
    out.max_mtt_depth = detail::merge_opt(a.max_mtt_depth, b.max_mtt_depth, "max_mtt_depth");
    out.search_range = detail::merge_opt(a.search_range, b.search_range, "search_range");
    out.intra_modes = detail::merge_opt(a.intra_modes, b.intra_modes, "intra mode");
    out.external_off = a.external_off;
    out.external_off.insert(b.external_off.begin(), b.external_off.end());
    return out;
}

inline codec::CodecConfig apply(const ConfigDelta& d, codec::CodecConfig cfg = {}) {
    cfg.tools = cfg.tools & ~d.disabled;
    if (d.max_mtt_depth) cfg.max_mtt_depth = *d.max_mtt_depth;
    if (d.search_range) cfg.search_range = *d.search_range;
    if (d.intra_modes) cfg.allowed_intra_modes = codec::IntraModeSet(*d.intra_modes);
    return cfg;
}

enum class EntryKind { anchor, group, combination, profile };

struct ProfileEntry {
    std::string id;
    EntryKind kind = EntryKind::group;
    std::string description;
    std::vector<std::string> parts;  // constituent groups (combinations) or the aliased entry (profiles)
    ConfigDelta delta;               // own effect; combinations and profiles resolve through parts
    std::optional<PublishedMetrics> published;
};

namespace detail {

inline ConfigDelta off(std::initializer_list<Tool> tools) {
    ConfigDelta d;
    for (auto t : tools) d.disabled.set(t);
    return d;
}

inline ProfileEntry group(std::string id, std::string desc, ConfigDelta d, PublishedMetrics m) {
    return {std::move(id), EntryKind::group, std::move(desc), {}, std::move(d), m};
}

inline ProfileEntry combo(std::string id, std::vector<std::string> parts, PublishedMetrics m) {
    std::string desc;
    for (const auto& p : parts) desc += (desc.empty() ? "" : " + ") + p;
    return {std::move(id), EntryKind::combination, std::move(desc), std::move(parts), {}, m};
}

inline std::vector<ProfileEntry> build_registry() {
    std::vector<ProfileEntry> r;
    r.push_back({"default", EntryKind::anchor, "Default feature-coding configuration (every tool on)", {}, {}, PublishedMetrics{}});

    auto g1 = ConfigDelta{};
    g1.intra_modes = std::vector<int>{codec::kHorizontal, codec::kVertical};
    auto g2 = ConfigDelta{};
    g2.max_mtt_depth = 1;
    auto g6 = off({Tool::sao, Tool::dbf});
    g6.external_off = {"ALF"};
    auto g8 = off({Tool::mrl, Tool::affine, Tool::imv, Tool::ciip, Tool::mmvd});
    g8.search_range = 16;

    // per-dataset BD-rates, then average, encode and decode time
    r.push_back(group("G1", "Intra prediction: intra modes -> {0, 1, 18, 50}", g1,
                      {{9.83, 7.23, 6.25, -0.57, 1.48, -0.10}, 4.02, 93.11, 99.35}));
    r.push_back(group("G2", "Block partitioning: MaxMTTHierarchyDepth -> 1", g2,
                      {{-3.57, 5.98, -3.11, 2.25, 4.76, 0.68}, 1.16, 37.03, 99.75}));
    r.push_back(group("G3", "Sub-block motion compensation: (Affine + SbTMVP) -> 0", off({Tool::affine, Tool::sbtmvp}),
                      {{-3.05, 4.03, 1.65, -1.21, 0.21, -3.01}, -0.23, 84.29, 99.39}));
    r.push_back(group("G4", "Transform tools: (MTS + SbT + DepQuant) -> 0", off({Tool::mts, Tool::sbt, Tool::depquant}),
                      {{9.03, 7.10, 1.67, 3.03, 4.40, 0.63}, 4.31, 85.52, 98.82}));
    r.push_back(group("G5", "Motion compensation: (BCW + GEO + CIIP) -> 0", off({Tool::bcw, Tool::geo, Tool::ciip}),
                      {{-2.75, 5.33, 5.55, -0.61, -0.65, -1.39}, 0.91, 90.50, 98.54}));
    r.push_back(group("G6", "In-loop filtering: (SAO + DBF + ALF) -> 0", g6,
                      {{-14.89, -5.60, 9.32, -4.00, -0.19, -2.38}, -2.96, 78.22, 85.51}));
    r.push_back(group("G7", "Intra tools: (MRL + ISP) -> 0", off({Tool::mrl, Tool::isp}),
                      {{-1.40, 8.89, 13.28, -2.37, 1.05, 1.06}, 3.42, 97.87, 96.31}));
    r.push_back(group("G8", "Rarely chosen tools: (MRL + Affine + IMV + CIIP + MMVD) -> 0, motion search 16x16", g8,
                      {{-2.18, 0.79, 0.05, 1.53, 2.90, 0.25}, 0.56, 71.20, 97.80}));

    r.push_back(combo("A", {"G3", "G6"}, {{-12.34, 0.63, 1.81, 1.65, 0.79, -1.78}, -1.54, 66.93, 91.50}));
    r.push_back(combo("B", {"A", "G8"}, {{-12.76, -0.10, 20.12, 10.48, 3.48, -2.82}, 3.07, 50.56, 89.15}));
    r.push_back(combo("C", {"B", "G5"}, {{-23.39, 5.34, 11.83, -3.43, 0.44, -1.87}, -1.85, 48.54, 90.97}));
    r.push_back(combo("D", {"C", "G2"}, {{-11.68, -0.34, 16.84, 11.84, 4.51, 1.71}, 3.81, 5.55, 86.59}));
    r.push_back(combo("E", {"D", "G7"}, {{-5.54, -1.61, 6.09, 10.89, 1.40, -0.98}, 1.71, 4.34, 86.62}));
    r.push_back(combo("F", {"E", "G1"}, {{-3.56, 5.05, 4.68, 10.23, 4.05, -2.59}, 2.98, 4.05, 85.39}));
    r.push_back(combo("G", {"F", "G4"}, {{0.06, 8.25, 3.14, 9.92, 4.01, 0.20}, 4.26, 4.51, 84.65}));

    auto alias = [&](std::string id, std::string target, std::string desc) {
        const auto it = std::find_if(r.begin(), r.end(), [&](const ProfileEntry& e) { return e.id == target; });
        r.push_back({std::move(id), EntryKind::profile, std::move(desc), {target}, {}, it->published});
    };
    alias("fast", "G6", "Fast profile: loop filters off");
    alias("faster", "C", "Faster profile: sub-block MC, loop filters, rare tools and MC blending off");
    alias("fastest", "E", "Fastest profile: Faster plus MTT depth 1 and MRL/ISP off");
    return r;
}

}  // namespace detail

inline const std::vector<ProfileEntry>& registry() {
    static const std::vector<ProfileEntry> r = detail::build_registry();
    return r;
}

inline const ProfileEntry& lookup(std::string_view id) {
    for (const auto& e : registry())
        if (e.id == id) return e;
    throw LookupError("unknown profile '" + std::string(id) + "'");
}

/// Groups an entry expands to, in first-seen order.
inline std::vector<std::string> constituent_groups(std::string_view id) {
    const auto& e = lookup(id);
    if (e.kind == EntryKind::group) return {e.id};
    std::vector<std::string> out;
    for (const auto& p : e.parts)
        for (auto& g : constituent_groups(p))
            if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(std::move(g));
    return out;
}

inline ConfigDelta delta_of(std::string_view id) {
    const auto& e = lookup(id);
    ConfigDelta d = e.delta;
    for (const auto& p : e.parts) d = d | delta_of(p);
    return d;
}

/// Overlay lines in external-encoder key names, one key=value per line.
inline std::string overlay_text(const ConfigDelta& d) {
    std::ostringstream os;
    if (d.intra_modes) {
        // no stock encoder key restricts the intra mode set
        os << "# IntraModes=0,1";
        for (int m : *d.intra_modes) os << ',' << m;
        os << " (needs an encoder patch)\n";
    }
    if (d.max_mtt_depth) os << "MaxMTTHierarchyDepth=" << *d.max_mtt_depth << '\n';
    if (d.search_range) os << "SearchRange=" << *d.search_range << '\n';
    for (const auto& x : d.external_off) os << x << "=0\n";
    for (auto t : codec::kAllTools)
        if (d.disabled.has(t)) os << codec::tool_name(t) << "=0\n";
    return os.str();
}

struct Resolved {
    ConfigDelta delta;
    codec::CodecConfig config;
    std::string overlay;
};

inline Resolved resolve(std::string_view id, const codec::CodecConfig& base = {}) {
    auto d = delta_of(id);
    return {d, apply(d, base), overlay_text(d)};
}

/// FNV-1a over a fixed-precision rendering of every entry's published
/// metrics; pins the transcription.
inline std::uint64_t metrics_checksum() {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    for (const auto& e : registry()) {
        if (!e.published) continue;
        const auto& m = *e.published;
        os << e.id;
        for (double v : m.bd_rate) os << ' ' << v;
        os << ' ' << m.avg_bd_rate << ' ' << m.enc_time << ' ' << m.dec_time << '\n';
    }
    Fnv1a h;
    const auto s = os.str();
    h.update(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    return h.value();
}

}  // namespace fcm::profiles
