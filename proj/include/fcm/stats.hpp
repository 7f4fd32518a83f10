#pragma once

// Mode-decision statistics over CU records: trace CSV ingestion, the mode
// report (histograms + flag usage), skip candidates and partition maps.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcm/codec/cu_record.hpp"
#include "fcm/error.hpp"
#include "fcm/packer.hpp"

namespace fcm::stats {

using codec::CuRecord;
using codec::CuRecordSet;
using codec::Tool;
using codec::ToolSet;

// ---------------------------------------------------------------------------
// CSV ingestion

enum class Dialect { native, generic };

struct RowError {
    std::size_t line = 0;  // 1-based, header is line 1
    std::string message;
};

struct IngestResult {
    CuRecordSet records;
    std::vector<RowError> errors;
    std::vector<std::string> warnings;
    std::vector<std::string> columns;  // recognised CuRecord fields, in file order
};

using AliasTable = std::map<std::string, std::string>;

/// Column names seen in common encoder trace dumps. Keys are matched
/// case-insensitively; user tables are consulted first.
inline const AliasTable& default_aliases() {
    static const AliasTable t = {
        {"poc", "frame"},          {"frameidx", "frame"},    {"posx", "x"},
        {"posy", "y"},             {"cux", "x"},             {"cuy", "y"},
        {"w", "width"},            {"h", "height"},          {"cuwidth", "width"},
        {"cuheight", "height"},    {"qtdepth", "qt_depth"},  {"mttdepth", "mt_depth"},
        {"mtdepth", "mt_depth"},   {"predmode", "pred_mode"}, {"intradir", "intra_mode"},
        {"ipm", "intra_mode"},     {"multirefidx", "mrl_idx"}, {"ispmode", "isp_mode"},
        {"mergeflag", "merge_flag"}, {"skipflag", "skip_flag"}, {"mergetype", "merge_type"},
        {"mergeidx", "merge_idx"}, {"mmvdmergeflag", "mmvd_flag"}, {"mmvdskipflag", "mmvd_flag"},
        {"imvmode", "imv_flag"},   {"bcwindex", "bcw_idx"},  {"ciipflag", "ciip_flag"},
        {"mvx", "mv_x"},           {"mvy", "mv_y"},          {"sbtidx", "sbt_idx"},
        {"sbtpos", "sbt_pos"},     {"mts_y", "mts_idx"},     {"mtsidx", "mts_idx"},
        {"rootcbf", "root_cbf"},   {"cbf_y", "cbf_y"},       {"cbfy", "cbf_y"},
    };
    return t;
}

namespace detail {

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

/// Splits one CSV line; double quotes group fields and "" escapes a quote.
inline std::vector<std::string> split_csv(std::string_view line, char delim) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    for (auto& f : out) f = std::string(trim(f));
    return out;
}

inline char sniff_delimiter(std::string_view header) {
    if (header.find(',') != std::string_view::npos) return ',';
    if (header.find(';') != std::string_view::npos) return ';';
    if (header.find('\t') != std::string_view::npos) return '\t';
    return ',';
}

inline bool is_field(const std::string& name) {
    const auto& cols = codec::cu_columns();
    return std::find(cols.begin(), cols.end(), name) != cols.end();
}

}  // namespace detail

/// Parses trace CSV text. Malformed rows are reported and skipped.
inline IngestResult ingest_trace_csv(std::istream& in, Dialect dialect, const AliasTable& aliases = {}) {
    IngestResult res;
    std::string line;
    std::size_t lineno = 0;
    // header: first non-blank line
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        if (!detail::trim(line).empty()) break;
    }
    if (detail::trim(line).empty()) throw FormatError("empty CU trace");
    const char delim = dialect == Dialect::native ? ',' : detail::sniff_delimiter(line);
    const auto header = detail::split_csv(line, delim);

    std::vector<std::optional<std::string>> slot(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string name = header[i];
        if (dialect == Dialect::generic) {
            const auto key = detail::lower(name);
            std::optional<std::string> mapped;
            for (const auto& [k, v] : aliases)
                if (detail::lower(k) == key) mapped = v;
            if (!mapped && detail::is_field(key)) mapped = key;
            if (!mapped) {
                const auto it = default_aliases().find(key);
                if (it != default_aliases().end()) mapped = it->second;
            }
            if (mapped) name = *mapped;
        }
        if (detail::is_field(name)) {
            if (std::find(res.columns.begin(), res.columns.end(), name) != res.columns.end()) {
                res.warnings.push_back("duplicate column '" + header[i] + "' ignored");
                continue;
            }
            slot[i] = name;
            res.columns.push_back(name);
        } else {
            res.warnings.push_back("unknown column '" + header[i] + "' ignored");
        }
    }
    for (const char* need : {"frame", "x", "y", "width", "height"})
        if (std::find(res.columns.begin(), res.columns.end(), need) == res.columns.end())
            throw FormatError(std::string("CU trace lacks mandatory column '") + need + "'");

    const bool derive_depth = std::find(res.columns.begin(), res.columns.end(), "depth") == res.columns.end();
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv(line, delim);
        if (cells.size() != header.size()) {
            res.errors.push_back({lineno, "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size())});
            continue;
        }
        CuRecord r;
        try {
            for (std::size_t i = 0; i < cells.size(); ++i)
                if (slot[i]) codec::set_cu_field(r, *slot[i], cells[i]);
            if (r.width <= 0 || r.height <= 0) throw ValidationError("non-positive CU size");
            if (r.x < 0 || r.y < 0 || r.frame < 0) throw ValidationError("negative position or frame");
        } catch (const Error& e) {
            res.errors.push_back({lineno, e.what()});
            continue;
        }
        if (derive_depth) r.depth = r.qt_depth + r.mt_depth;
        res.records.push_back(r);
    }
    return res;
}

inline IngestResult ingest_trace_csv(const std::string& path, Dialect dialect, const AliasTable& aliases = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return ingest_trace_csv(in, dialect, aliases);
}

/// Tools whose evidence columns are present; a trace that never mentions
/// a tool says nothing about whether it was used.
inline ToolSet observed_tools(const std::vector<std::string>& columns) {
    auto has = [&](std::string_view c) { return std::find(columns.begin(), columns.end(), c) != columns.end(); };
    ToolSet s;
    s.set(Tool::mrl, has("mrl_idx"));
    s.set(Tool::isp, has("isp_mode"));
    s.set(Tool::affine, has("merge_type"));
    s.set(Tool::sbtmvp, has("merge_type"));
    s.set(Tool::geo, has("merge_type"));
    s.set(Tool::mts, has("mts_idx"));
    s.set(Tool::sbt, has("sbt_idx"));
    s.set(Tool::depquant, has("depquant"));
    s.set(Tool::bcw, has("bcw_idx"));
    s.set(Tool::ciip, has("ciip_flag"));
    s.set(Tool::imv, has("imv_flag"));
    s.set(Tool::mmvd, has("mmvd_flag"));
    s.set(Tool::dbf, has("dbf"));
    s.set(Tool::sao, has("sao"));
    return s;
}

// ---------------------------------------------------------------------------
// Mode report

enum class Population { all_cu, intra_cu, inter_cu };
enum class Weighting { count, area };

inline std::string_view population_name(Population p) {
    switch (p) {
        case Population::all_cu: return "all_cu";
        case Population::intra_cu: return "intra_cu";
        case Population::inter_cu: return "inter_cu";
    }
    return "?";
}

struct Bin {
    std::string label;
    std::int64_t count = 0;
    double percent = 0.0;
    bool operator==(const Bin&) const = default;
};

struct Histogram {
    std::string field;
    Population population = Population::all_cu;
    Weighting weighting = Weighting::count;
    std::int64_t total = 0;
    std::vector<Bin> bins;
    bool operator==(const Histogram&) const = default;

    [[nodiscard]] double percent(std::string_view label) const {
        for (const auto& b : bins)
            if (b.label == label) return b.percent;
        return 0.0;
    }
};

/// Share of CUs (over all CUs) showing a flag or tool.
struct Usage {
    std::string name;
    std::int64_t count = 0;
    double percent = 0.0;
    double area_percent = 0.0;
    bool operator==(const Usage&) const = default;
};

struct ModeReport {
    std::int64_t cu_count = 0;
    std::int64_t intra_count = 0;
    std::int64_t inter_count = 0;
    std::vector<Histogram> histograms;
    std::vector<Usage> flags;
    std::vector<Usage> tools;  // one per observed tool, named as tool_name()
    bool operator==(const ModeReport&) const = default;

    [[nodiscard]] const Histogram& histogram(std::string_view field, Population p = Population::all_cu,
                                             Weighting w = Weighting::count) const {
        for (const auto& h : histograms)
            if (h.field == field && h.population == p && h.weighting == w) return h;
        throw LookupError("no histogram " + std::string(field) + "/" + std::string(population_name(p)));
    }
    [[nodiscard]] const Usage* tool(Tool t) const {
        for (const auto& u : tools)
            if (u.name == codec::tool_name(t)) return &u;
        return nullptr;
    }
};

inline constexpr std::string_view kAbsent = "none";

/// Integer-pixel max-norm length, half-up rounding of quarter-sample units.
inline int mv_length(const codec::MotionVector& mv) { return (std::max(std::abs(mv.x), std::abs(mv.y)) + 2) / 4; }

namespace detail {

// absent values order after every present one
struct Key {
    bool absent = false;
    int value = 0;
    std::string text;  // non-numeric labels (pred_mode, merge_type)
    auto operator<=>(const Key&) const = default;
};

inline std::string label_of(const Key& k, bool tail5) {
    if (k.absent) return std::string(kAbsent);
    if (!k.text.empty()) return k.text;
    if (tail5 && k.value >= 5) return "5+";
    return std::to_string(k.value);
}

inline Key opt_key(const std::optional<int>& v) { return v ? Key{false, *v, {}} : Key{true, 0, {}}; }

struct FieldSpec {
    std::string field;
    Population population;
    std::function<Key(const CuRecord&)> key;
    bool tail5 = false;
};

inline const std::vector<FieldSpec>& field_specs() {
    static const std::vector<FieldSpec> specs = {
        {"depth", Population::all_cu, [](const CuRecord& r) { return Key{false, r.depth, {}}; }},
        {"qt_depth", Population::all_cu, [](const CuRecord& r) { return Key{false, r.qt_depth, {}}; }},
        {"mt_depth", Population::all_cu, [](const CuRecord& r) { return Key{false, r.mt_depth, {}}; }},
        {"pred_mode", Population::all_cu,
         [](const CuRecord& r) { return Key{false, static_cast<int>(r.pred_mode), std::string(codec::pred_mode_name(r.pred_mode))}; }},
        {"intra_mode", Population::intra_cu, [](const CuRecord& r) { return opt_key(r.intra_mode); }},
        {"intra_mode", Population::all_cu,
         [](const CuRecord& r) { return r.pred_mode == codec::PredMode::intra ? opt_key(r.intra_mode) : Key{true, 0, {}}; }},
        {"mrl_idx", Population::intra_cu, [](const CuRecord& r) { return opt_key(r.mrl_idx); }},
        {"isp_mode", Population::intra_cu, [](const CuRecord& r) { return opt_key(r.isp_mode); }},
        {"merge_type", Population::inter_cu,
         [](const CuRecord& r) {
             if (!r.merge_type) return Key{true, 0, {}};
             return Key{false, static_cast<int>(*r.merge_type), std::string(codec::merge_type_name(*r.merge_type))};
         }},
        {"merge_idx", Population::inter_cu, [](const CuRecord& r) { return opt_key(r.merge_idx); }},
        {"bcw_idx", Population::inter_cu, [](const CuRecord& r) { return opt_key(r.bcw_idx); }},
        {"mv_length", Population::inter_cu,
         [](const CuRecord& r) { return r.mv ? Key{false, std::min(mv_length(*r.mv), 5), {}} : Key{true, 0, {}}; }, true},
        {"sbt_idx", Population::inter_cu, [](const CuRecord& r) { return opt_key(r.sbt_idx); }},
        {"sbt_pos", Population::inter_cu, [](const CuRecord& r) { return opt_key(r.sbt_pos); }},
        {"mts_idx", Population::all_cu, [](const CuRecord& r) { return Key{false, r.mts_idx, {}}; }},
    };
    return specs;
}

inline bool in_population(const CuRecord& r, Population p) {
    switch (p) {
        case Population::all_cu: return true;
        case Population::intra_cu: return r.pred_mode == codec::PredMode::intra;
        case Population::inter_cu: return r.pred_mode == codec::PredMode::inter;
    }
    return false;
}

inline std::int64_t area(const CuRecord& r) { return static_cast<std::int64_t>(r.width) * r.height; }

inline void finish(Histogram& h) {
    for (auto& b : h.bins) h.total += b.count;
    for (auto& b : h.bins) b.percent = h.total > 0 ? 100.0 * static_cast<double>(b.count) / static_cast<double>(h.total) : 0.0;
}

struct FlagSpec {
    std::string name;
    std::function<bool(const CuRecord&)> test;
};

inline const std::vector<FlagSpec>& flag_specs() {
    static const std::vector<FlagSpec> specs = {
        {"merge_flag", [](const CuRecord& r) { return r.merge_flag; }},
        {"skip_flag", [](const CuRecord& r) { return r.skip_flag; }},
        {"mmvd_flag", [](const CuRecord& r) { return r.mmvd_flag; }},
        {"imv_flag", [](const CuRecord& r) { return r.imv_flag; }},
        {"ciip_flag", [](const CuRecord& r) { return r.ciip_flag; }},
        {"affine", [](const CuRecord& r) { return r.merge_type == codec::MergeType::affine; }},
        {"sbtmvp", [](const CuRecord& r) { return r.merge_type == codec::MergeType::sbtmvp; }},
        {"geo", [](const CuRecord& r) { return r.merge_type == codec::MergeType::geo; }},
        {"mrl", [](const CuRecord& r) { return r.mrl_idx.value_or(0) > 0; }},
        {"isp", [](const CuRecord& r) { return r.isp_mode.value_or(0) > 0; }},
        {"sbt", [](const CuRecord& r) { return r.sbt_idx.has_value(); }},
        {"mts", [](const CuRecord& r) { return r.mts_idx > 0; }},
        {"bcw", [](const CuRecord& r) { return r.bcw_idx.has_value() && *r.bcw_idx != codec::kBcwDefault; }},
        {"root_cbf", [](const CuRecord& r) { return r.root_cbf; }},
        {"cbf_y", [](const CuRecord& r) { return r.cbf_y; }},
        {"depquant", [](const CuRecord& r) { return r.depquant; }},
        {"dbf", [](const CuRecord& r) { return r.dbf; }},
        {"sao", [](const CuRecord& r) { return r.sao; }},
    };
    return specs;
}

inline Usage usage(const CuRecordSet& records, std::string name, const std::function<bool(const CuRecord&)>& test) {
    Usage u;
    u.name = std::move(name);
    std::int64_t area_hit = 0, area_all = 0;
    for (const auto& r : records) {
        area_all += area(r);
        if (test(r)) {
            ++u.count;
            area_hit += area(r);
        }
    }
    u.percent = 100.0 * static_cast<double>(u.count) / static_cast<double>(records.size());
    u.area_percent = area_all > 0 ? 100.0 * static_cast<double>(area_hit) / static_cast<double>(area_all) : 0.0;
    return u;
}

}  // namespace detail

/// Histograms, flag usage and tool usage of a record set. Results do not
/// depend on record order.
inline ModeReport mode_report(const CuRecordSet& records, ToolSet observed = ToolSet::all()) {
    if (records.empty()) throw ValidationError("mode report needs at least one CU");
    ModeReport rep;
    rep.cu_count = static_cast<std::int64_t>(records.size());
    for (const auto& r : records) (r.pred_mode == codec::PredMode::intra ? rep.intra_count : rep.inter_count)++;

    for (const auto& spec : detail::field_specs()) {
        std::map<detail::Key, std::array<std::int64_t, 2>> counts;
        for (const auto& r : records) {
            if (!detail::in_population(r, spec.population)) continue;
            auto& c = counts[spec.key(r)];
            c[0] += 1;
            c[1] += detail::area(r);
        }
        for (int w = 0; w < 2; ++w) {
            Histogram h;
            h.field = spec.field;
            h.population = spec.population;
            h.weighting = w ? Weighting::area : Weighting::count;
            for (const auto& [k, c] : counts) {
                const auto label = detail::label_of(k, spec.tail5);
                if (!h.bins.empty() && h.bins.back().label == label)
                    h.bins.back().count += c[w];
                else
                    h.bins.push_back({label, c[w], 0.0});
            }
            detail::finish(h);
            rep.histograms.push_back(std::move(h));
        }
    }
    for (const auto& f : detail::flag_specs()) rep.flags.push_back(detail::usage(records, f.name, f.test));
    for (auto t : codec::kAllTools)
        if (observed.has(t))
            rep.tools.push_back(detail::usage(records, std::string(codec::tool_name(t)), [t](const CuRecord& r) { return codec::uses_tool(r, t); }));
    return rep;
}

/// Tools used by fewer than `threshold` percent of CUs, rarest first
/// (ties keep tool order). Tools never used are candidates too.
inline std::vector<std::string> skip_candidates(const ModeReport& report, double threshold) {
    if (!(threshold > 0.0 && threshold < 100.0)) throw ValidationError("threshold must lie in (0, 100)");
    std::vector<const Usage*> hits;
    for (const auto& u : report.tools)
        if (u.percent < threshold) hits.push_back(&u);
    std::stable_sort(hits.begin(), hits.end(), [](const Usage* a, const Usage* b) { return a->percent < b->percent; });
    std::vector<std::string> out;
    for (const auto* u : hits) out.push_back(u->name);
    return out;
}

inline nlohmann::json to_json(const ModeReport& rep) {
    nlohmann::json j;
    j["cu_count"] = rep.cu_count;
    j["intra_count"] = rep.intra_count;
    j["inter_count"] = rep.inter_count;
    auto& hs = j["histograms"] = nlohmann::json::array();
    for (const auto& h : rep.histograms) {
        nlohmann::json jh{{"field", h.field},
                          {"population", population_name(h.population)},
                          {"weighting", h.weighting == Weighting::count ? "count" : "area"},
                          {"total", h.total}};
        auto& bins = jh["bins"] = nlohmann::json::array();
        for (const auto& b : h.bins) bins.push_back({{"label", b.label}, {"count", b.count}, {"percent", b.percent}});
        hs.push_back(std::move(jh));
    }
    auto usages = [](const std::vector<Usage>& us) {
        auto a = nlohmann::json::array();
        for (const auto& u : us)
            a.push_back({{"name", u.name}, {"count", u.count}, {"percent", u.percent}, {"area_percent", u.area_percent}});
        return a;
    };
    j["flags"] = usages(rep.flags);
    j["tools"] = usages(rep.tools);
    return j;
}

/// Aligned text; count-weighted histograms only (area variants are in JSON).
inline void write_text(std::ostream& os, const ModeReport& rep) {
    os << "CUs: " << rep.cu_count << " (intra " << rep.intra_count << ", inter " << rep.inter_count << ")\n";
    const auto flags = os.flags();
    os << std::fixed << std::setprecision(2);
    for (const auto& h : rep.histograms) {
        if (h.weighting != Weighting::count || h.total == 0) continue;
        os << '\n' << h.field << " [" << population_name(h.population) << ", n=" << h.total << "]\n";
        for (const auto& b : h.bins) os << "  " << std::left << std::setw(10) << b.label << std::right << std::setw(8) << b.count << std::setw(9) << b.percent << " %\n";
    }
    os << "\ntool usage (% of CUs / % of area)\n";
    for (const auto& u : rep.tools) os << "  " << std::left << std::setw(10) << u.name << std::right << std::setw(8) << u.percent << std::setw(9) << u.area_percent << '\n';
    os << "\nflags (% of CUs / % of area)\n";
    for (const auto& u : rep.flags) os << "  " << std::left << std::setw(10) << u.name << std::right << std::setw(8) << u.percent << std::setw(9) << u.area_percent << '\n';
    os.flags(flags);
}

// ---------------------------------------------------------------------------
// Partition maps

struct Pixmap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

    [[nodiscard]] std::array<std::uint8_t, 3> at(int x, int y) const {
        const auto i = (static_cast<std::size_t>(y) * width + x) * 3;
        return {rgb[i], rgb[i + 1], rgb[i + 2]};
    }
    void set(int x, int y, std::array<std::uint8_t, 3> c) {
        const auto i = (static_cast<std::size_t>(y) * width + x) * 3;
        rgb[i] = c[0];
        rgb[i + 1] = c[1];
        rgb[i + 2] = c[2];
    }
};

inline constexpr std::array<std::uint8_t, 3> kIntraOutline = {255, 64, 32};
inline constexpr std::array<std::uint8_t, 3> kInterOutline = {32, 160, 255};
inline constexpr std::uint8_t kBlankBackground = 96;

/// One-pixel outlines of every CU of `frame`, drawn inside each CU so
/// neighbours never overwrite each other. The background is the frame's
/// samples scaled to 8 bits when `base` is given.
inline Pixmap render_partition_map(const CuRecordSet& records, int frame, const PackedVideo* base = nullptr) {
    int w = 0, h = 0;
    bool any = false;
    for (const auto& r : records)
        if (r.frame == frame) {
            any = true;
            w = std::max(w, r.x + r.width);
            h = std::max(h, r.y + r.height);
        }
    if (!any) throw ValidationError("no CU records for frame " + std::to_string(frame));
    if (base) {
        if (frame >= base->frame_count) throw ValidationError("background video has no frame " + std::to_string(frame));
        w = base->width;
        h = base->height;
    }
    Pixmap img{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * 3, kBlankBackground)};
    if (base) {
        const auto& f = base->frames[static_cast<std::size_t>(frame)];
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const auto v = static_cast<std::uint8_t>(std::min<int>(f[static_cast<std::size_t>(y) * w + x], 1023) >> 2);
                img.set(x, y, {v, v, v});
            }
    }
    for (const auto& r : records) {
        if (r.frame != frame) continue;
        const auto c = r.pred_mode == codec::PredMode::intra ? kIntraOutline : kInterOutline;
        const int x0 = r.x, y0 = r.y, x1 = std::min(r.x + r.width, w) - 1, y1 = std::min(r.y + r.height, h) - 1;
        if (x0 > x1 || y0 > y1) continue;
        for (int x = x0; x <= x1; ++x) {
            img.set(x, y0, c);
            img.set(x, y1, c);
        }
        for (int y = y0; y <= y1; ++y) {
            img.set(x0, y, c);
            img.set(x1, y, c);
        }
    }
    return img;
}

inline void write_ppm(std::ostream& os, const Pixmap& img) {
    os << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
}

}  // namespace fcm::stats
